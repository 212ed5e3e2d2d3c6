use cvarvi::analysis::{
    check_cwe, error_metric, kkt_residual, licq_rank, monotonicity_probe, natural_residual, recover_multipliers,
    reference_solution, reference_solution_from, ORACLE_MAX_ITER,
};
use cvarvi::cvar::RiskLevel;
use cvarvi::linalg::norm_inf;
use cvarvi::problems::{preset, toy1, PRESETS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol_for(name: &str) -> f64 {
    if name == "sioux_falls_cvar" {
        1e-6
    } else {
        1e-8
    }
}

#[test]
fn kkt_certifies_every_preset() {
    for (name, _) in PRESETS {
        let p = preset::<f64>(name).unwrap();
        let tol = tol_for(name);
        let h = reference_solution(&p, tol).unwrap();
        assert!(natural_residual(&p, &h).unwrap() <= tol);
        let point = recover_multipliers(&p, &h, 1e-6 * (1.0 + norm_inf(&h))).unwrap();
        let r = kkt_residual(&point, &p).unwrap();
        for (label, v) in r.components() {
            assert!(v >= 0.0, "{name} {label}");
            assert!(v <= 10.0 * tol.max(1e-9) * (1.0 + norm_inf(&h)), "{name} {label} = {v}");
        }
        assert!(point.lambda.iter().all(|l| *l >= 0.0));
        let (rank, count) = licq_rank(&p, &h, 1e-6 * (1.0 + norm_inf(&h)));
        assert_eq!(rank, count, "{name}: LICQ fails");
    }
}

#[test]
fn cwe_holds_at_routing_solutions() {
    for name in ["toy1", "sioux_falls_cvar"] {
        let p = preset::<f64>(name).unwrap();
        let h = reference_solution(&p, tol_for(name)).unwrap();
        let f = p.exact(&h).unwrap();
        let tol = 1e-4 * (1.0 + norm_inf(&f));
        let r = check_cwe(&h, &f, p.od_groups.as_ref().unwrap(), tol).unwrap();
        assert!(r.pass, "{name}: {r:?}");
    }
}

#[test]
fn toy1_kkt_example() {
    let p = toy1::<f64>(RiskLevel::new(0.05).unwrap()).unwrap();
    let h = reference_solution(&p, 1e-8).unwrap();
    let point = recover_multipliers(&p, &h, 1e-9).unwrap();
    assert_eq!(point.lambda, vec![0.0, 0.0]);
    assert!((point.mu[0] + 1.4958333).abs() < 1e-6);
    assert!(kkt_residual(&point, &p).unwrap().max() <= 1e-5);
}

#[test]
fn solutions_agree_across_starts() {
    for name in ["toy1", "nash2"] {
        let p = preset::<f64>(name).unwrap();
        let tol = 1e-9;
        let a = reference_solution(&p, tol).unwrap();
        let corner: Vec<f64> = p.feasible.bounding_box().unwrap().1;
        let start = cvarvi::geometry::project_feasible(&corner, &p.feasible, 1e-12).unwrap();
        let b = reference_solution_from(&p, &start, tol, ORACLE_MAX_ITER).unwrap();
        let e = error_metric(&a, &b, &p).unwrap();
        // the natural residual bounds the distance to the solution up to the
        // Lipschitz and monotonicity constants of the map, both O(1) here
        assert!(e <= 2.0 * tol * 10.0, "{name}: {e}");
    }
}

#[test]
fn sioux_falls_map_value_is_unique() {
    let p = preset::<f64>("sioux_falls_cvar").unwrap();
    let a = reference_solution(&p, 1e-8).unwrap();
    let mut start = p.default_start.clone();
    for g in p.od_groups.as_ref().unwrap() {
        let total: f64 = g.iter().map(|&i| start[i]).sum();
        for &i in g {
            start[i] = 0.0;
        }
        start[*g.last().unwrap()] = total;
    }
    let b = reference_solution_from(&p, &start, 1e-8, ORACLE_MAX_ITER).unwrap();
    assert!(error_metric(&a, &b, &p).unwrap() <= 1e-5);
}

#[test]
fn presets_probe_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, _) in PRESETS {
        let p = preset::<f64>(name).unwrap();
        let (lo, hi) = p.feasible.bounding_box().unwrap();
        let r = monotonicity_probe(&p, &lo, &hi, 500, &mut rng).unwrap();
        assert!(r.min_inner >= -1e-9, "{name}: {r:?}");
    }
}
