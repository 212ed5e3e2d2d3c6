use crate::cvar::RiskLevel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problems::nash::{build_nash_game, NashGameSpec};
use crate::problems::routing::{build_routing_game, OdPair, RoutingNetwork};
use crate::problems::separable::toy1;
use crate::problems::tntp::parse_tntp;
use crate::problems::StochasticViProblem;
use crate::scalar::Real;

/// The Sioux Falls network in TNTP `_net` format.
pub const SIOUX_FALLS_NET: &str = include_str!("../../data/SiouxFalls_net.tntp");

/// `(name, description)` of every preset.
pub const PRESETS: [(&str, &str); 3] = [
    ("sioux_falls_cvar", "Sioux Falls routing game, 3 OD pairs x 10 paths, alpha = 0.05"),
    ("toy1", "two parallel routes, C1 = 2h1 + U(0, 0.5), C2 = h2 + 1, unit demand"),
    ("nash2", "two-player CVaR Nash game with g ~ U(0, 1) on the box [0, 2]^2"),
];

/// Sioux Falls with `U(0, 0.5)` noise on every edge touching nodes 10, 16
/// and 17, and OD demands 300 (1→19), 600 (13→8), 200 (12→18). Ids are
/// 0-based.
pub fn sioux_falls_network<T: Real>() -> Result<RoutingNetwork<T>> {
    let od = |o: usize, d: usize, demand: f64| OdPair { origin: o - 1, destination: d - 1, demand: T::lit(demand) };
    parse_tntp::<T>(SIOUX_FALLS_NET)?.with_noise_at_nodes(&[9, 15, 16], T::zero(), T::lit(0.5))?.with_od_pairs(vec![
        od(1, 19, 300.0),
        od(13, 8, 600.0),
        od(12, 18, 200.0),
    ])
}

/// Risk level of every preset.
pub const PRESET_ALPHA: f64 = 0.05;
/// Paths per OD pair in the Sioux Falls preset.
pub const PRESET_K_PATHS: usize = 10;

pub fn preset<T: Real>(name: &str) -> Result<StochasticViProblem<T>> {
    preset_with(name, RiskLevel::new(T::lit(PRESET_ALPHA))?, PRESET_K_PATHS)
}

/// A preset at another risk level; `k_paths` applies to routing presets only.
pub fn preset_with<T: Real>(name: &str, alpha: RiskLevel<T>, k_paths: usize) -> Result<StochasticViProblem<T>> {
    let mut p = match name {
        "sioux_falls_cvar" => build_routing_game(&sioux_falls_network()?, k_paths, alpha)?,
        "toy1" => toy1(alpha)?,
        "nash2" => {
            let spec = NashGameSpec {
                own_slope: vec![T::one(), T::one()],
                q: Matrix::from_rows(&[vec![T::one(), T::lit(0.25)], vec![T::lit(0.25), T::one()]], 2)?,
                r: vec![T::lit(-2.0), T::lit(-2.0)],
                noise: (T::zero(), T::one()),
                upper: vec![T::lit(2.0), T::lit(2.0)],
            };
            build_nash_game(&spec, alpha)?
        }
        other => return Err(Error::Unsupported(format!("unknown preset {other:?}"))),
    };
    p.name = name.into();
    Ok(p)
}
