//! Solver library for nonlinear parabolic equations of the form
//!
//! ```text
//! d/dt b(u) - div( a(x, grad u) + K(u) ) = f      in Omega x (0,T)
//! u = 0                                           on the boundary
//! b(u)|_{t=0} = b(u0)
//! ```
//!
//! where the diffusion stress `a` grows like a generalized Orlicz function
//! `phi(x,t)` (constant or variable exponent), `b` is strictly increasing with
//! bounded derivative and `K` is a Lipschitz convection term.
//!
//! The discretization is conforming P1 finite elements in space combined with
//! the implicit (backward) Euler scheme in time. Besides the solver itself the
//! crate ships the measurement tools used to check the scheme's energy
//! estimates numerically:
//!
//! * [`musielak`] - generalized Orlicz machinery: modulars, Luxemburg norms,
//!   Young conjugates and doubling diagnostics.
//! * [`problem`] - problem data `(b, a, K, f, u0)` with structure constants,
//!   plus sampling validators for the growth/monotonicity/coercivity
//!   assumptions.
//! * [`fem`] - simplicial meshes, P1 spaces, quadrature, residual/Jacobian
//!   assembly and a banded direct linear solver.
//! * [`stepper`] - damped Newton (with Picard fallback) for the per-step
//!   nonlinear systems and the time loop.
//! * [`diagnostics`] - per-step energy ledger, time interpolants, Steklov
//!   averages and a modular Poincare probe.
//! * [`harness`] - manufactured solutions, brute-force step oracles and
//!   temporal/spatial convergence studies.
//!
//! The crate is `no_std` compatible (it requires `alloc`); all floating point
//! special functions go through `libm` so results do not depend on whether
//! `std` is linked. File formats, configuration and the command line live in
//! the companion `muspar-cli` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
// indexed loops walk several per-cell arrays in step; `!(x > 0)` style
// comparisons deliberately catch NaN
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
pub mod fem;
pub mod harness;
pub mod musielak;
pub mod problem;
pub mod stepper;

pub(crate) mod real;
