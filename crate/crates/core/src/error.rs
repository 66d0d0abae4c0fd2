use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("number of summed uniforms must be at least 1")]
    ZeroOrder,
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("density {0} outside the admissible interval (1/2, 1)")]
    DensityOutOfRange(f64),
    #[error("negative separation x = {0}; use g(-x) = g(x)")]
    NegativeSeparation(f64),
    #[error("grid guard violated: {0}")]
    Grid(String),
    #[error("fit window [{lo}, {hi}] does not lie inside the grid")]
    Window { lo: f64, hi: f64 },
    #[error("only {found} extrema of |h| in the fit window, need at least {needed}")]
    TooFewExtrema { found: usize, needed: usize },
    #[error("fitted envelope does not decay (slope {0})")]
    NonDecaying(f64),
    #[error("lambda = {re} + {im}i is within rounding of a pole")]
    NearPole { re: f64, im: f64 },
    #[error("lambda = -p is a removable singular point of the pole equation")]
    SingularPoint,
    #[error("branch index must be nonzero")]
    ZeroBranch,
    #[error("pole search for branch n = {n} at p = {p} did not converge in {iters} iterations")]
    NoConvergence { p: f64, n: i32, iters: usize },
    #[error("pole search for branch n = {n} at p = {p} collapsed onto the trivial root lambda = 0")]
    TrivialRoot { p: f64, n: i32 },
    #[error("branches {a} and {b} converged to the same pole at p = {p}")]
    RootCollision { p: f64, a: i32, b: i32 },
    #[error("infeasible canonical state: n = {n}, l = {l} (need n >= 2 and 1 < l/n < 2)")]
    Infeasible { n: usize, l: f64 },
    #[error("histogram misconfigured: {0}")]
    Bins(String),
    #[error("invalid unit system: kT = {kt}, ell = {ell} (both must be positive)")]
    Units { kt: f64, ell: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
