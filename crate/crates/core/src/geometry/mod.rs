//! Feasible sets `H = {h : Ah = b, qⁱ(h) ≤ 0}` and the projections the solvers
//! need: onto `H`, onto the inequality block, onto `{Ah = b}`, and the matrix
//! `L` that maps any direction into the null space of `A`.

mod projection;
mod set;
mod subspace;

pub use projection::{
    dykstra, project_feasible, project_feasible_dykstra, project_ineq, project_simplex, project_sublevel, Projection,
    FEASIBLE_SWEEPS, INEQ_SWEEPS,
};
pub use set::{Constraint, FeasibleSet, Halfspace, SimplexProduct, Structure, DEFAULT_PROJECTION_TOL};
pub use subspace::{build_subspace_projector, project_affine, AffineSubspace, SubspaceProjector, RANK_TOL};
