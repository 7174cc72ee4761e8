#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "platonic/tensor.hpp"

namespace platonic {

/// A finite subgroup of O(n), n in {2,3}, stored as explicit orthogonal
/// matrices together with its Cayley and inverse tables.
struct FiniteGroup {
    std::string name;
    int dim = 0;
    std::vector<Tensor> elements;  // each (dim, dim); element 0 is the identity
    std::vector<std::vector<int>> cayley;
    std::vector<int> inverse;
    bool has_reflections = false;

    std::size_t order() const { return elements.size(); }

    bool same_group(const FiniteGroup& o) const {
        if (name != o.name || dim != o.dim || order() != o.order()) return false;
        return true;
    }
};

namespace detail {

inline double det(const Tensor& m) {
    if (m.shape[0] == 2) return m[0] * m[3] - m[1] * m[2];
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

inline Tensor matprod(const Tensor& a, const Tensor& b) { return matmul(a, b); }

inline double matdist(const Tensor& a, const Tensor& b) { return max_abs_diff(a, b); }

inline Tensor identity(int n) {
    Tensor t({static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
    for (int i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
    return t;
}

inline Tensor rot2(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return Tensor({2, 2}, {c, -s, s, c});
}

inline Tensor refl2(double angle) {
    // reflection about the line at angle/2
    double c = std::cos(angle), s = std::sin(angle);
    return Tensor({2, 2}, {c, s, s, -c});
}

// Rodrigues rotation about a (not necessarily unit) axis.
inline Tensor rot3_axis_angle(double ax, double ay, double az, double angle) {
    double n = std::sqrt(ax * ax + ay * ay + az * az);
    ax /= n;
    ay /= n;
    az /= n;
    double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    return Tensor({3, 3},
                  {t * ax * ax + c, t * ax * ay - s * az, t * ax * az + s * ay,
                   t * ax * ay + s * az, t * ay * ay + c, t * ay * az - s * ax,
                   t * ax * az - s * ay, t * ay * az + s * ax, t * az * az + c});
}

// Canonical ordering: identity first, then lexicographic by flattened
// entries rounded to 1e-9.
inline void sort_elements(std::vector<Tensor>& els, int dim) {
    auto key = [](const Tensor& m) {
        std::vector<std::int64_t> k(m.numel());
        for (std::size_t i = 0; i < m.numel(); ++i) k[i] = std::llround(m.data[i] * 1e9);
        return k;
    };
    Tensor id = identity(dim);
    std::stable_sort(els.begin(), els.end(), [&](const Tensor& a, const Tensor& b) {
        bool ia = matdist(a, id) < 1e-6, ib = matdist(b, id) < 1e-6;
        if (ia != ib) return ia;
        return key(a) < key(b);
    });
}

inline std::vector<Tensor> signed_permutations(bool even_only, bool sign_product_positive) {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    static const bool perm_even[6] = {true, false, false, true, true, false};
    std::vector<Tensor> out;
    for (int p = 0; p < 6; ++p) {
        if (even_only && !perm_even[p]) continue;
        for (int bits = 0; bits < 8; ++bits) {
            double s0 = (bits & 1) ? -1.0 : 1.0;
            double s1 = (bits & 2) ? -1.0 : 1.0;
            double s2 = (bits & 4) ? -1.0 : 1.0;
            if (sign_product_positive) {
                double prod = s0 * s1 * s2;
                bool det_pos = perm_even[p] ? prod > 0 : prod < 0;
                if (!det_pos) continue;  // keep det +1 only
            }
            Tensor m({3, 3});
            m.data[0 * 3 + perms[p][0]] = s0;
            m.data[1 * 3 + perms[p][1]] = s1;
            m.data[2 * 3 + perms[p][2]] = s2;
            out.push_back(std::move(m));
        }
    }
    return out;
}

// Closure of generators under multiplication, deduplicating by matrix
// distance < tol. Errors out past `cap` elements.
inline std::vector<Tensor> closure(std::vector<Tensor> gens, int dim, std::size_t cap,
                                   double tol = 1e-6) {
    std::vector<Tensor> els;
    els.push_back(identity(dim));
    auto find = [&](const Tensor& m) -> int {
        for (std::size_t i = 0; i < els.size(); ++i)
            if (matdist(els[i], m) < tol) return static_cast<int>(i);
        return -1;
    };
    for (auto& g : gens)
        if (find(g) < 0) els.push_back(g);
    std::size_t frontier = 0;
    while (frontier < els.size()) {
        std::size_t end = els.size();
        for (std::size_t i = frontier; i < end; ++i)
            for (std::size_t j = 0; j < end; ++j) {
                Tensor p1 = matprod(els[i], els[j]);
                if (find(p1) < 0) els.push_back(std::move(p1));
                Tensor p2 = matprod(els[j], els[i]);
                if (find(p2) < 0) els.push_back(std::move(p2));
                if (els.size() > cap)
                    throw ConstructionError("group closure exceeded " + std::to_string(cap) +
                                            " elements");
            }
        frontier = end;
    }
    return els;
}

}  // namespace detail

/// Validate every FiniteGroup invariant; throws ConstructionError on failure.
inline void validate_group(const FiniteGroup& g, double matrix_tol = 1e-9) {
    std::size_t n = g.order();
    if (n == 0) throw ConstructionError(g.name + ": empty group");
    Tensor id = detail::identity(g.dim);
    if (detail::matdist(g.elements[0], id) > 1e-12)
        throw ConstructionError(g.name + ": element 0 is not the identity");
    for (std::size_t i = 0; i < n; ++i) {
        const Tensor& m = g.elements[i];
        Tensor mtm = matmul(permute(m, {1, 0}), m);
        if (detail::matdist(mtm, id) > 1e-12)
            throw ConstructionError(g.name + ": element " + std::to_string(i) +
                                    " is not orthogonal");
        double d = detail::det(m);
        if (std::abs(std::abs(d) - 1.0) > 1e-12)
            throw ConstructionError(g.name + ": element " + std::to_string(i) +
                                    " has |det| != 1");
    }
    // Latin square + identity row/column + matrix consistency + associativity.
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<bool> seen_row(n, false), seen_col(n, false);
        for (std::size_t j = 0; j < n; ++j) {
            int rij = g.cayley[i][j], cji = g.cayley[j][i];
            if (rij < 0 || static_cast<std::size_t>(rij) >= n || seen_row[rij])
                throw ConstructionError(g.name + ": Cayley row " + std::to_string(i) +
                                        " is not a permutation");
            if (cji < 0 || static_cast<std::size_t>(cji) >= n || seen_col[cji])
                throw ConstructionError(g.name + ": Cayley column " + std::to_string(i) +
                                        " is not a permutation");
            seen_row[rij] = seen_col[cji] = true;
        }
        if (g.cayley[0][i] != static_cast<int>(i) || g.cayley[i][0] != static_cast<int>(i))
            throw ConstructionError(g.name + ": identity row/column violated");
        if (g.cayley[i][g.inverse[i]] != 0)
            throw ConstructionError(g.name + ": inverse table violated at " + std::to_string(i));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Tensor prod = matmul(g.elements[i], g.elements[j]);
            if (detail::matdist(prod, g.elements[g.cayley[i][j]]) > matrix_tol)
                throw ConstructionError(g.name + ": matrix/Cayley inconsistency at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
            for (std::size_t k = 0; k < n; ++k)
                if (g.cayley[g.cayley[i][j]][k] != g.cayley[i][g.cayley[j][k]])
                    throw ConstructionError(g.name + ": associativity violated");
        }
}

/// Build one of the supported reference-frame groups by name.
/// Names: trivial2, trivial3, C<n>, D<n>, flip2, flip3, signflips3,
/// tetrahedron, octahedron, icosahedron.
inline FiniteGroup build_group(const std::string& name) {
    FiniteGroup g;
    g.name = name;
    std::vector<Tensor> els;
    if (name == "trivial2") {
        g.dim = 2;
        els.push_back(detail::identity(2));
    } else if (name == "trivial3") {
        g.dim = 3;
        els.push_back(detail::identity(3));
    } else if (name == "flip2") {
        g.dim = 2;
        els.push_back(detail::identity(2));
        els.push_back(Tensor({2, 2}, {-1, 0, 0, 1}));
    } else if (name == "flip3") {
        g.dim = 3;
        els.push_back(detail::identity(3));
        els.push_back(Tensor({3, 3}, {-1, 0, 0, 0, 1, 0, 0, 0, 1}));
    } else if (name == "signflips3") {
        g.dim = 3;
        for (int bits = 0; bits < 8; ++bits) {
            Tensor m({3, 3});
            m.data[0] = (bits & 1) ? -1.0 : 1.0;
            m.data[4] = (bits & 2) ? -1.0 : 1.0;
            m.data[8] = (bits & 4) ? -1.0 : 1.0;
            els.push_back(std::move(m));
        }
    } else if (name == "tetrahedron") {
        g.dim = 3;
        els = detail::signed_permutations(/*even_only=*/true, /*sign_product_positive=*/true);
    } else if (name == "octahedron") {
        g.dim = 3;
        els = detail::signed_permutations(/*even_only=*/false, /*sign_product_positive=*/true);
    } else if (name == "icosahedron") {
        g.dim = 3;
        // Order-5 axis through a vertex (0, 1, phi); order-3 axis through the
        // face center along (1, 1, 1).
        double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        std::vector<Tensor> gens;
        gens.push_back(detail::rot3_axis_angle(0.0, 1.0, phi, 2.0 * M_PI / 5.0));
        gens.push_back(detail::rot3_axis_angle(1.0, 1.0, 1.0, 2.0 * M_PI / 3.0));
        els = detail::closure(std::move(gens), 3, 60);
        if (els.size() != 60)
            throw ConstructionError("icosahedron closure found " + std::to_string(els.size()) +
                                    " elements, expected 60");
    } else if (name.size() >= 2 && (name[0] == 'C' || name[0] == 'D')) {
        int n = 0;
        try {
            std::size_t pos = 0;
            n = std::stoi(name.substr(1), &pos);
            if (pos != name.size() - 1) n = 0;
        } catch (...) {
            n = 0;
        }
        if (n < 1) throw ConstructionError("unknown group name: " + name);
        g.dim = 2;
        for (int k = 0; k < n; ++k) els.push_back(detail::rot2(2.0 * M_PI * k / n));
        if (name[0] == 'D')
            for (int k = 0; k < n; ++k) els.push_back(detail::refl2(2.0 * M_PI * k / n));
    } else {
        throw ConstructionError("unknown group name: " + name);
    }

    // Snap near-integer entries so small-group matrices are integer-exact.
    for (auto& m : els)
        for (double& x : m.data)
            if (std::abs(x - std::round(x)) < 1e-12) x = std::round(x);

    detail::sort_elements(els, g.dim);
    g.elements = std::move(els);

    std::size_t order = g.order();
    g.cayley.assign(order, std::vector<int>(order, -1));
    g.inverse.assign(order, -1);
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t j = 0; j < order; ++j) {
            Tensor prod = matmul(g.elements[i], g.elements[j]);
            int k = -1;
            for (std::size_t m = 0; m < order; ++m)
                if (detail::matdist(prod, g.elements[m]) < 1e-6) {
                    k = static_cast<int>(m);
                    break;
                }
            if (k < 0)
                throw ConstructionError(g.name + ": product of elements " + std::to_string(i) +
                                        " and " + std::to_string(j) + " is not in the group");
            g.cayley[i][j] = k;
            if (k == 0) g.inverse[i] = static_cast<int>(j);
        }
    for (std::size_t i = 0; i < order; ++i)
        g.has_reflections = g.has_reflections || detail::det(g.elements[i]) < 0.0;

    validate_group(g);
    return g;
}

/// Left regular action on the group axis (axis 1 of a (N, |G|, ...) tensor):
/// output at frame j is the input at frame cayley[inverse[i], j].
inline std::vector<std::size_t> regular_action_indices(const FiniteGroup& g, int i) {
    if (i < 0 || static_cast<std::size_t>(i) >= g.order())
        throw IndexError("group element index out of range");
    std::vector<std::size_t> idx(g.order());
    for (std::size_t j = 0; j < g.order(); ++j)
        idx[j] = static_cast<std::size_t>(g.cayley[g.inverse[i]][j]);
    return idx;
}

/// L_R on a (N, |G|, channels...) feature map; a pure bit-identical permutation.
inline Tensor act_on_group_axis(const FiniteGroup& g, int i, const Tensor& f) {
    if (f.rank() < 2 || f.shape[1] != g.order())
        throw DimensionError("act_on_group_axis: group axis length " +
                             (f.rank() >= 2 ? std::to_string(f.shape[1]) : std::string("?")) +
                             " does not match group order " + std::to_string(g.order()));
    return gather(f, 1, regular_action_indices(g, i));
}

/// Matrix-vector product element[i] * v.
inline Tensor apply_element(const FiniteGroup& g, int i, const Tensor& v) {
    if (i < 0 || static_cast<std::size_t>(i) >= g.order())
        throw IndexError("group element index out of range");
    if (v.rank() != 1 || v.shape[0] != static_cast<std::size_t>(g.dim))
        throw DimensionError("apply_element: vector length does not match group dimension " +
                             std::to_string(g.dim));
    const Tensor& m = g.elements[i];
    Tensor out({static_cast<std::size_t>(g.dim)});
    for (int r = 0; r < g.dim; ++r)
        for (int c = 0; c < g.dim; ++c) out.data[r] += m.data[r * g.dim + c] * v.data[c];
    return out;
}

/// element[inverse[i]] * v, the frame projection p(R) = R^{-1} p.
inline Tensor apply_inverse_element(const FiniteGroup& g, int i, const Tensor& v) {
    return apply_element(g, g.inverse[i], v);
}

}  // namespace platonic
