#pragma once

#include "lapdiag/tensor.hpp"

#include <cstdint>

namespace lapdiag {

/// <S, H3(x)> where H3(x) = x^3 - 3 Sym(x (x) I) is the order-3 Hermite tensor.
double hermite3_apply(const SymTensor3& s, const Vector& x);

/// E <S, Z^3>^2 for Z ~ N(0, I), i.e. 6 |S|_F^2 + 9 |<S, I>|^2.
double cubic_second_moment(const SymTensor3& s);

struct MomentEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo estimate of E <S, Z^3>^{2k}. Blocks of kMonteCarloBlock draws
/// use independent (seed, block) streams, so the result does not depend on
/// `workers`. For 2k >= 8 every block is accumulated relative to its own
/// largest magnitude and rescaled on merge.
MomentEstimate mc_cubic_moment(const SymTensor3& s, int k, std::size_t samples,
                               std::uint64_t seed, unsigned workers = 1);

/// Monte Carlo estimate of E <S, H3(Z)>^{2k}.
MomentEstimate mc_hermite3_moment(const SymTensor3& s, int k, std::size_t samples,
                                  std::uint64_t seed, unsigned workers = 1);

}  // namespace lapdiag
