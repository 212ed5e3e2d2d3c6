use cvarvi::cvar::{empirical_cvar, exact_cvar_uniform, RiskLevel};
use cvarvi::linalg::{norm_inf, Matrix};
use cvarvi::problems::{
    build_nash_game, build_routing_game, build_routing_game_with, parse_tntp, preset, sioux_falls_network, yen_k_shortest_paths,
    NashGameSpec, OdPair, RoutingMapOracle, StochasticViProblem, PRESETS, SIOUX_FALLS_NET,
};
use cvarvi::rng::RngStream;
use std::time::Instant;

const AUDIT_SAMPLES: usize = 1_000_000;

/// Empirical CVaR over 10⁶ sampler events against the exact map.
fn audit(p: &StochasticViProblem<f64>, h: &[f64], seed: u64) {
    let est = p.estimate(h, AUDIT_SAMPLES, &RngStream::new(seed, 0)).unwrap();
    let exact = p.exact(h).unwrap();
    let gap = norm_inf(&est.iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>());
    let tol = 5e-3 * (1.0 + norm_inf(&exact));
    assert!(gap <= tol, "{}: gap {gap} above {tol}", p.name);
}

#[test]
fn consistency_audit_toy1() {
    let p = preset::<f64>("toy1").unwrap();
    audit(&p, &p.default_start, 1);
    audit(&p, &[0.9, 0.1], 2);
}

#[test]
fn consistency_audit_nash2() {
    let p = preset::<f64>("nash2").unwrap();
    audit(&p, &p.default_start, 3);
    audit(&p, &[0.1, 1.9], 4);
}

#[test]
fn consistency_audit_sioux_falls() {
    let p = preset::<f64>("sioux_falls_cvar").unwrap();
    audit(&p, &p.default_start, 5);
    let mut skewed = p.default_start.clone();
    for g in p.od_groups.as_ref().unwrap() {
        let total: f64 = g.iter().map(|&i| skewed[i]).sum();
        for (r, &i) in g.iter().enumerate() {
            skewed[i] = total * if r == 0 { 0.5 } else { 0.5 / (g.len() - 1) as f64 };
        }
    }
    audit(&p, &skewed, 6);
}

#[test]
fn monte_carlo_oracle_tracks_closed_form() {
    let net = sioux_falls_network::<f64>().unwrap();
    let level = RiskLevel::new(0.05).unwrap();
    let closed = build_routing_game(&net, 10, level).unwrap();
    let mc = build_routing_game_with(&net, 10, level, RoutingMapOracle::MonteCarlo { samples: 200_000, seed: 9 }).unwrap();
    let h = &closed.default_start;
    let (a, b) = (closed.exact(h).unwrap(), mc.exact(h).unwrap());
    let gap = norm_inf(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());
    assert!(gap <= 5e-3 * (1.0 + norm_inf(&a)), "{gap}");
    assert!(mc.exact_map_tolerance > closed.exact_map_tolerance);
    // the Monte Carlo map is a fixed function of h
    assert_eq!(mc.exact(h).unwrap(), b);
}

#[test]
fn sioux_falls_fixture() {
    let net = parse_tntp::<f64>(SIOUX_FALLS_NET).unwrap();
    assert_eq!(net.node_count, 24);
    assert_eq!(net.edges.len(), 76);
    // first link of the public file: 1 → 2, capacity 25900.20064, fft 6
    let e = &net.edges[0];
    assert_eq!((e.tail, e.head), (0, 1));
    assert!((e.capacity - 25900.20064).abs() < 1e-9);
    assert_eq!(e.free_flow_time, 6.0);
}

#[test]
fn sioux_falls_routing_game() {
    let net = sioux_falls_network::<f64>().unwrap();
    let ods: Vec<_> = net.od_pairs.iter().map(|o| (o.origin + 1, o.destination + 1, o.demand)).collect();
    assert_eq!(ods, vec![(1, 19, 300.0), (13, 8, 600.0), (12, 18, 200.0)]);
    let p = build_routing_game(&net, 10, RiskLevel::new(0.05).unwrap()).unwrap();
    assert_eq!(p.n(), 30);
    assert_eq!(p.feasible.a().rows(), 3);
    assert_eq!(p.feasible.b(), &[300.0, 600.0, 200.0]);
    // every noisy edge touches node 10, 16 or 17
    for e in net.edges.iter().filter(|e| e.noise.is_some()) {
        assert!([9, 15, 16].contains(&e.tail) || [9, 15, 16].contains(&e.head));
        assert_eq!(e.noise, Some((0.0, 0.5)));
    }
    // selected paths are the ten cheapest and ordered by free-flow time
    for (od, paths) in net.od_pairs.iter().zip(p_paths(&net)) {
        assert_eq!(paths.len(), 10);
        assert!(paths.windows(2).all(|w| w[0].cost <= w[1].cost));
        assert_eq!(paths[0].nodes.first(), Some(&od.origin));
        assert_eq!(paths[0].nodes.last(), Some(&od.destination));
    }
}

fn p_paths(net: &cvarvi::RoutingNetwork) -> Vec<Vec<cvarvi::problems::Path>> {
    net.od_pairs.iter().map(|od| yen_k_shortest_paths(net, od.origin, od.destination, 10)).collect()
}

#[test]
fn noiseless_routing_cost_is_flow_model() {
    let mut net = sioux_falls_network::<f64>().unwrap();
    for e in &mut net.edges {
        e.noise = None;
    }
    let net = net.with_od_pairs(vec![OdPair { origin: 0, destination: 18, demand: 100.0 }]).unwrap();
    let p = build_routing_game(&net, 3, RiskLevel::new(0.05).unwrap()).unwrap();
    let h = p.default_start.clone();
    let batch = p.sample(&h, 5, &RngStream::new(0, 0)).unwrap();
    let est = p.estimate(&h, 5, &RngStream::new(0, 0)).unwrap();
    // zero noise: every path costs its free-flow time
    let paths = yen_k_shortest_paths(&net, 0, 18, 3);
    for (i, path) in paths.iter().enumerate() {
        assert!((est[i] - path.cost).abs() < 1e-12);
        assert!((0..5).all(|j| batch.row(j)[i] == est[i]));
    }
}

#[test]
fn nash_example_map() {
    let spec = NashGameSpec::<f64> {
        own_slope: vec![1.0, 1.0],
        q: Matrix::from_rows(&[vec![1.0, 0.25], vec![0.25, 1.0]], 2).unwrap(),
        r: vec![0.0, 0.0],
        noise: (0.0, 1.0),
        upper: vec![2.0, 2.0],
    };
    let level = RiskLevel::new(0.05).unwrap();
    let p = build_nash_game(&spec, level).unwrap();
    let tail = exact_cvar_uniform(0.0, 1.0, level).unwrap();
    assert!((tail - 0.975).abs() < 1e-15);
    let f = p.exact(&[0.4, 1.2]).unwrap();
    assert!((f[0] - (0.4 + 1.2 / 4.0 + 0.975)).abs() < 1e-12);
    assert!((f[1] - (1.2 + 0.4 / 4.0 + 0.975)).abs() < 1e-12);
    audit(&p, &[0.4, 1.2], 8);
}

#[test]
fn presets_listed() {
    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, vec!["sioux_falls_cvar", "toy1", "nash2"]);
}

#[test]
fn uniform_closed_form_against_monte_carlo() {
    let level = RiskLevel::new(0.05).unwrap();
    let stream = RngStream::new(42, 0);
    let mut rng = stream.component(0);
    let draws: Vec<f64> = (0..AUDIT_SAMPLES).map(|_| 0.5 * rand::Rng::gen::<f64>(&mut rng)).collect();
    let t = Instant::now();
    let est = empirical_cvar(&draws, level).unwrap();
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert!((est - 0.4875).abs() <= 1e-3, "{est}");
}
