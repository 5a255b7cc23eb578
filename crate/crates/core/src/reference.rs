//! Published values the computations are checked against.

/// Stationary probability of front state 0, to 10 decimals.
pub const PI0: f64 = 0.464_718_427_5;
/// Time constant, to 10 decimals.
pub const TAU: f64 = 0.682_725_075_9;
/// Average residual time, to 10 decimals.
pub const T_RESID: f64 = 0.595_344_466_5;

/// `a_1..a_9`.
pub const TABLE_A: [i64; 9] = [3, 11, 56, 340, 2395, 19231, 173490, 1737706, 19136803];
/// `b_1..b_9`.
pub const TABLE_B: [i64; 9] = [1, 5, 26, 158, 1113, 8937, 80624, 807544, 8893225];

/// `A_2..A_7`, `A_n = (a_n - a_{n-1}) / n`.
pub const TABLE_CAP_A: [i64; 6] = [4, 15, 71, 411, 2806, 22037];
/// `B_2..B_7`.
pub const TABLE_CAP_B: [i64; 6] = [2, 7, 33, 191, 1304, 10241];
/// `Υ(n,0)` for `n = 1..7`.
pub const TABLE_UPSILON_0: [i64; 7] = [1, 1, 1, 2, 7, 33, 191];
/// `2Υ(n,3) + Υ(n,0)` for `n = 1..7`.
pub const TABLE_UPSILON_COMBO: [i64; 7] = [-3, -1, 1, 4, 15, 71, 411];
