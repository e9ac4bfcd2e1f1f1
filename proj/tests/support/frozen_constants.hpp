#pragma once

// Gaussian moments a[k][p] = E sigma^{(k)}(Z) Z^p computed once with mpmath
// at 30 digits and frozen here.

namespace lapdiag::testing {

inline constexpr double kA10 = 0.2066209641419070372623508;
inline constexpr double kA12 = 0.1442244801826478437692057;
inline constexpr double kA14 = 0.3098639619192100714976154;
inline constexpr double kA21 = -0.06239648395925919349314512;
inline constexpr double kA23 = -0.1228094786287334598100017;
inline constexpr double kA30 = -0.06239648395925919349314512;
inline constexpr double kA32 = 0.001983489289784927176288553;
inline constexpr double kA34 = 0.07650995135356071619139426;

}  // namespace lapdiag::testing
