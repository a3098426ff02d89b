#pragma once

#include <cstddef>
#include <vector>

#include "ietlab/errors.hpp"

namespace ietlab {

// Monodromy permutation of {1..d}: images[i] is the image position (1-based)
// of the i-th interval in domain order.
class Permutation {
public:
    Permutation() = default;

    explicit Permutation(std::vector<std::size_t> images) : images_(std::move(images)) {
        const std::size_t d = images_.size();
        std::vector<bool> seen(d + 1, false);
        for (std::size_t v : images_) {
            if (v < 1 || v > d || seen[v]) throw Error("not a permutation of 1..d");
            seen[v] = true;
        }
    }

    std::size_t size() const { return images_.size(); }
    std::size_t operator()(std::size_t i) const { return images_[i - 1]; } // 1-based
    const std::vector<std::size_t>& images() const { return images_; }

    std::size_t preimage(std::size_t v) const {
        for (std::size_t i = 1; i <= size(); ++i)
            if ((*this)(i) == v) return i;
        throw Error("value out of range");
    }

    Permutation inverse() const {
        std::vector<std::size_t> inv(size());
        for (std::size_t i = 1; i <= size(); ++i) inv[(*this)(i) - 1] = i;
        return Permutation(inv);
    }

    bool is_irreducible() const {
        std::size_t running_max = 0;
        for (std::size_t k = 1; k < size(); ++k) {
            running_max = std::max(running_max, images_[k - 1]);
            if (running_max == k) return false; // pi({1..k}) = {1..k}
        }
        return true;
    }

    void require_irreducible() const {
        std::size_t running_max = 0;
        for (std::size_t k = 1; k < size(); ++k) {
            running_max = std::max(running_max, images_[k - 1]);
            if (running_max == k) throw ReduciblePermutation(k);
        }
    }

    bool operator==(const Permutation& o) const { return images_ == o.images_; }
    bool operator<(const Permutation& o) const { return images_ < o.images_; }

    static Permutation symmetric(std::size_t d) { // (d, d-1, ..., 1)
        std::vector<std::size_t> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = d - i;
        return Permutation(v);
    }

private:
    std::vector<std::size_t> images_;
};

// Antisymmetric sign table: delta = Omega * lambda gives the translation of
// each exchanged interval.
inline std::vector<std::vector<int>> displacement_matrix(const Permutation& p) {
    const std::size_t d = p.size();
    std::vector<std::vector<int>> omega(d, std::vector<int>(d, 0));
    for (std::size_t i = 1; i <= d; ++i)
        for (std::size_t j = 1; j <= d; ++j) {
            if (i < j && p(i) > p(j)) omega[i - 1][j - 1] = 1;
            else if (i > j && p(i) < p(j)) omega[i - 1][j - 1] = -1;
        }
    return omega;
}

} // namespace ietlab
