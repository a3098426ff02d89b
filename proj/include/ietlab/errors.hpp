#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ietlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReduciblePermutation : Error {
    explicit ReduciblePermutation(std::size_t k)
        : Error("permutation fixes {1.." + std::to_string(k) + "}"), block(k) {}
    std::size_t block;
};

struct NonPositiveLength : Error {
    explicit NonPositiveLength(std::size_t i)
        : Error("length " + std::to_string(i) + " is not positive"), index(i) {}
    std::size_t index;
};

struct EndpointHit : Error {
    EndpointHit(long step_, std::size_t index_)
        : Error("orbit hit endpoint beta_" + std::to_string(index_) + " at step " +
                std::to_string(step_)),
          step(step_), index(index_) {}
    long step;
    std::size_t index;
};

struct ReturnTimeExceeded : Error {
    explicit ReturnTimeExceeded(long budget)
        : Error("first return exceeded " + std::to_string(budget) + " steps") {}
};

struct UndefinedStep : Error {
    explicit UndefinedStep(long step_ = 0)
        : Error("induction step undefined (tied lengths) at step " + std::to_string(step_)),
          step(step_) {}
    long step;
};

struct ConeViolation : Error {
    ConeViolation() : Error("tau vector violates the cone inequalities") {}
};

struct NonComposablePath : Error {
    NonComposablePath() : Error("arrows do not compose") {}
};

struct ZeroColumn : Error {
    explicit ZeroColumn(std::size_t i)
        : Error("matrix column " + std::to_string(i) + " is zero"), index(i) {}
    std::size_t index;
};

struct AsymmetricCoefficients : Error {
    AsymmetricCoefficients() : Error("left/right log coefficient sums differ") {}
};

struct NonPositiveRoof : Error {
    explicit NonPositiveRoof(double x)
        : Error("roof non-positive near x=" + std::to_string(x)) {}
};

struct AtSingularity : Error {
    explicit AtSingularity(std::size_t index_)
        : Error("evaluation at singularity beta_" + std::to_string(index_)), index(index_) {}
    std::size_t index;
};

struct StepBudgetExceeded : Error {
    explicit StepBudgetExceeded(long budget)
        : Error("flow step budget " + std::to_string(budget) + " exhausted") {}
};

struct DegenerateShrink : Error {
    DegenerateShrink() : Error("displacement not smaller than the tower base") {}
};

struct DepthExceeded : Error {
    DepthExceeded() : Error("max induction depth reached below the last window") {}
};

struct InsufficientTail : Error {
    InsufficientTail() : Error("fewer than 50 samples beyond the median") {}
};

struct NoDominantTower : Error {
    NoDominantTower() : Error("no tower of area > 1/2 at the requested scale") {}
};

struct DegenerateProduct : Error {
    DegenerateProduct() : Error("cocycle product failed to become positive") {}
};

struct ValidationError : Error {
    ValidationError(std::string path_, const std::string& what_)
        : Error(path_ + ": " + what_), path(std::move(path_)) {}
    std::string path;
};

} // namespace ietlab
