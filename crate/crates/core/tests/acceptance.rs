//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one line, whatever the outcome of the others.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use annulus_dyn::annulus::{classify_basin, Basin, Power};
use annulus_dyn::conley::{
    attractor_pairs, chain_classes, default_eps, lyapunov, subdivision_graph, transition_graph, BoxDigraph,
    ChainClass, ChainClasses, Grid, DEFAULT_SEED,
};
use annulus_dyn::constructions::horseshoe::{self, horseshoe_heteroclinic_chain, horseshoe_symbolic_point};
use annulus_dyn::constructions::{AffineMap, HorseshoeCore};
use annulus_dyn::mapspec::{build_horseshoe_core, build_paper_example};
use annulus_dyn::periodic::{
    concat_solver, concat_triple, find_fixed_points_of_power, fixed_point_index, square_loop, Continued,
    INDEX_SAMPLES,
};
use annulus_dyn::rotation::{
    atkinson_small_sums_exact, power_rotation_check, prime_end_rotation_estimate, rotation_interval_of_class,
    rotation_of_periodic, End, RationalRot, LIFT_TOL,
};
use annulus_dyn::{AnnulusPoint, LiftMap, LiftPoint};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn words(q: usize) -> impl Iterator<Item = String> {
    (0..1u32 << q).map(move |bits| (0..q).map(|k| if bits >> (q - 1 - k) & 1 == 1 { '1' } else { '0' }).collect())
}

/// The depth-8 horseshoe graph and the class holding both fixed points.
fn horseshoe_depth8() -> (BoxDigraph, ChainClasses, usize) {
    let spec = build_horseshoe_core();
    let grid = Grid::new(horseshoe::R, 8).unwrap();
    let dg = transition_graph(&spec, &grid, default_eps(&grid)).unwrap();
    let cc = chain_classes(&dg);
    let a = cc.class_of(dg.node_of_point(horseshoe::A).unwrap());
    (dg, cc, a)
}

fn class_containing_ab(dg: &BoxDigraph, cc: &ChainClasses) -> Result<ChainClass, String> {
    let a = cc.class_of(dg.node_of_point(horseshoe::A).ok_or("a not on the grid")?);
    let b = cc.class_of(dg.node_of_point(horseshoe::B).ok_or("b not on the grid")?);
    ensure!(a == b, "a in class {a}, b in class {b}");
    ensure!(cc.get(a).recurrent, "class of a is not recurrent");
    Ok(cc.get(a).clone())
}

fn c1_prime_ends() -> Outcome {
    let start = Instant::now();
    let alpha = 1.0 / 3.0;
    let beta = 2f64.sqrt() - 1.0;
    let spec = build_paper_example(alpha, beta).map_err(|e| e.to_string())?;
    let seed = AnnulusPoint::new(0.3, 0.0);
    let plus = prime_end_rotation_estimate(&spec, seed, 10_000, End::Plus).map_err(|e| e.to_string())?;
    let minus = prime_end_rotation_estimate(&spec, seed, 10_000, End::Minus).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure!((plus - alpha).abs() < 1e-3, "plus end {plus}");
    ensure!((minus - beta).abs() < 1e-3, "minus end {minus}");
    ensure!(secs < 60.0, "took {secs:.1}s");
    Ok(format!("plus {plus:.6}, minus {minus:.6}, {secs:.2}s"))
}

fn c2_fixed_points() -> Outcome {
    let h = build_horseshoe_core();
    let found = find_fixed_points_of_power(&h, 1, 0, horseshoe::R, 12, 1e-10).map_err(|e| e.to_string())?;
    let a = found.iter().find(|o| o.point.sup_dist(horseshoe::A) < 1e-10).ok_or("a not found")?;
    let found = find_fixed_points_of_power(&h, 1, 1, horseshoe::R, 12, 1e-10).map_err(|e| e.to_string())?;
    let b = found.iter().find(|o| o.point.sup_dist(horseshoe::B) < 1e-10).ok_or("b not found")?;
    ensure!(a.residual < 1e-10 && b.residual < 1e-10, "residuals {} {}", a.residual, b.residual);
    let ra = rotation_of_periodic(&h, a.point, 1, LIFT_TOL).map_err(|e| e.to_string())?;
    let rb = rotation_of_periodic(&h, b.point, 1, LIFT_TOL).map_err(|e| e.to_string())?;
    ensure!(ra == RationalRot { p: 0, q: 1 }, "rot(a) = {ra}");
    ensure!(rb == RationalRot { p: 1, q: 1 }, "rot(b) = {rb}");
    // The converse reading: the found points satisfy h~(x) = T^p(x).
    let ya = h.eval(a.point).unwrap();
    let yb = h.eval(b.point).unwrap();
    ensure!((ya.x - a.point.x).round() == 0.0 && (yb.x - b.point.x).round() == 1.0, "deck readings disagree");
    Ok(format!("residuals {:.1e}, {:.1e}; rotations {ra}, {rb}", a.residual, b.residual))
}

fn c3_all_rotations() -> Outcome {
    let h = HorseshoeCore;
    let (dg, cc, ab) = horseshoe_depth8();
    let mut orbits = 0;
    for q in 1..=6usize {
        for p in 0..=q as i64 {
            let found = find_fixed_points_of_power(&h, q, p, horseshoe::R, 12, 1e-10).map_err(|e| format!("({p},{q}): {e}"))?;
            for w in words(q).filter(|w| w.matches('1').count() as i64 == p) {
                let s = horseshoe_symbolic_point(&w).map_err(|e| e.to_string())?;
                let mut y = s.point.clone();
                let mut orbit = Vec::with_capacity(q);
                for _ in 0..q {
                    orbit.push(y.to_f64());
                    y = h.eval_exact(&y).map_err(|e| e.to_string())?;
                }
                ensure!(y == s.point.deck(p), "word {w}: h^q(x) != T^p(x)");
                let target = s.point.to_f64();
                ensure!(found.iter().any(|o| o.point.sup_dist(target) < 1e-8), "word {w}: search missed {target:?}");
                for z in orbit {
                    let v = dg.node_of_point(LiftPoint::new(z.x - z.x.floor(), z.t)).ok_or("orbit point off grid")?;
                    ensure!(cc.class_of(v) == ab, "word {w}: box {v} outside the class of a and b");
                }
                orbits += 1;
            }
        }
    }
    Ok(format!("{orbits} exact orbits located; all in class {ab} at depth 8"))
}

fn c4_chain_transitivity() -> Outcome {
    let h = HorseshoeCore;
    let chain = horseshoe_heteroclinic_chain(0.01).map_err(|e| e.to_string())?;
    for (k, w) in chain.windows(2).enumerate() {
        let y = h.eval(w[0].lift()).map_err(|e| e.to_string())?.project();
        ensure!(y.dist(w[1]) < 0.01, "step {k} jumps {}", y.dist(w[1]));
    }
    let (dg, cc, _) = horseshoe_depth8();
    let class = class_containing_ab(&dg, &cc)?;
    Ok(format!("chain of {} points valid; a, b share class {} ({} boxes)", chain.len(), class.id, class.nodes.len()))
}

fn c5_rotation_interval() -> Outcome {
    let (dg, cc, _) = horseshoe_depth8();
    let iv = rotation_interval_of_class(&dg, &class_containing_ab(&dg, &cc)?).map_err(|e| e.to_string())?;
    ensure!(iv.lo <= 0.0 && iv.hi >= 1.0, "[{}, {}] misses [0, 1]", iv.lo, iv.hi);
    ensure!(iv.lo >= -0.15 && iv.hi <= 1.15, "[{}, {}] too wide", iv.lo, iv.hi);
    let spec = build_horseshoe_core();
    let fine = Grid::new(horseshoe::R, 10).unwrap();
    let (dg10, cc10) = subdivision_graph(&spec, &fine, 6, 2.0, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let iv10 = rotation_interval_of_class(&dg10, &class_containing_ab(&dg10, &cc10)?).map_err(|e| e.to_string())?;
    ensure!(iv10.slack < iv.slack, "slack {} -> {}", iv.slack, iv10.slack);
    ensure!(iv10.lo <= 0.0 && iv10.hi >= 1.0, "depth 10 interval [{}, {}]", iv10.lo, iv10.hi);
    Ok(format!(
        "depth 8 [{:.4}, {:.4}] slack {:.4}; depth 10 [{:.4}, {:.4}] slack {:.4}",
        iv.lo, iv.hi, iv.slack, iv10.lo, iv10.hi, iv10.slack
    ))
}

fn c6_lyapunov() -> Outcome {
    let spec = build_horseshoe_core();
    let mut notes = Vec::new();
    for depth in 2..=8 {
        let grid = Grid::new(horseshoe::R, depth).unwrap();
        let dg = transition_graph(&spec, &grid, default_eps(&grid)).unwrap();
        let cc = chain_classes(&dg);
        let l = lyapunov(&dg, &cc);
        let bad = l.violations(&dg, &cc);
        ensure!(bad.is_empty(), "depth {depth}: {} of {} cross edges fail", bad.len(), l.cross_edge_count(&dg, &cc));
        ensure!(l.plateaus.iter().all(|p| p.level.is_cantor()), "depth {depth}: plateau off the Cantor set");
        if depth <= 6 {
            let lat = attractor_pairs(&dg, &cc);
            ensure!(lat.identity_holds == Some(true), "depth {depth}: identity {:?}", lat.identity_holds);
            notes.push(format!("d{depth}: {} pairs", lat.pairs.len()));
        }
    }
    Ok(format!("strict decrease at depths 2..8; identity holds ({})", notes.join(", ")))
}

fn c7_power_scaling() -> Outcome {
    let spec = build_horseshoe_core();
    let (dg, cc, _) = horseshoe_depth8();
    let class = class_containing_ab(&dg, &cc)?;
    let r = power_rotation_check(&spec, &dg, &class, 2).map_err(|e| e.to_string())?;
    let p = r.power.ok_or("no recurrent class for h^2")?;
    ensure!(r.deviation < 0.3, "deviation {}", r.deviation);
    Ok(format!("h [{:.4}, {:.4}], h^2 [{:.4}, {:.4}], deviation {:.4}", r.base.lo, r.base.hi, p.lo, p.hi, r.deviation))
}

fn c8_index() -> Outcome {
    let h = HorseshoeCore;
    // b is fixed by T^-1 o h~.
    let at = |c: LiftPoint, shift: i64| {
        let g = Power::new(&h, 1, shift);
        fixed_point_index(&Continued::new(&g, c), &square_loop(c, 0.01), INDEX_SAMPLES)
    };
    let ia = at(horseshoe::A, 0).map_err(|e| e.to_string())?;
    let ib = at(horseshoe::B, 1).map_err(|e| e.to_string())?;
    let sink = AffineMap::new([[0.5, 0.1], [-0.2, 0.3]], [0.2, 0.1]);
    let c = sink.fixed_point().unwrap();
    let is = fixed_point_index(&sink, &square_loop(c, 0.05), INDEX_SAMPLES).map_err(|e| e.to_string())?;
    let empty = fixed_point_index(&sink, &square_loop(LiftPoint::new(c.x + 1.0, c.t), 0.05), INDEX_SAMPLES)
        .map_err(|e| e.to_string())?;
    ensure!((ia, ib, is, empty) == (-1, -1, 1, 0), "indices {ia} {ib} {is} {empty}");
    Ok(format!("a {ia}, b {ib}, contraction {is}, empty loop {empty}"))
}

fn c9_atkinson() -> Outcome {
    let s = horseshoe_symbolic_point("01").map_err(|e| e.to_string())?;
    ensure!((s.p, s.q) == (1, 2), "word 01 has (p, q) = ({}, {})", s.p, s.q);
    let hits = atkinson_small_sums_exact(&s.point, s.p, s.q, 1e-9, 10_000).map_err(|e| e.to_string())?;
    ensure!(hits.len() == 10_000 && hits.iter().copied().eq(1..=10_000), "{} of 10000 qualify", hits.len());
    Ok("all n <= 10^4 qualify".into())
}

fn c10_concat() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for _ in 0..1000 {
        let a = rng.gen_range(1..1_000i64);
        let b = rng.gen_range(-1_000..1_000i64);
        let p1 = rng.gen_range(-50..50i64);
        let p2 = p1 + rng.gen_range(2..50i64);
        let eta_min = rng.gen_range(1..100i64);
        let s = concat_solver(a, b, p1, p2, eta_min).map_err(|e| e.to_string())?;
        ensure!(a + s.zeta + s.eta == s.xi, "(5) fails for {a} {b} {p1} {p2}");
        ensure!(b + s.zeta * p1 + s.eta * p2 == s.xi * (p1 + 1), "(6) fails for {a} {b} {p1} {p2}");
        ensure!(s.eta >= eta_min && s.xi >= 1 && s.zeta >= 1, "nonpositive counts {s:?}");
        if s.eta > eta_min {
            let prev = concat_triple(a, b, p1, p2, s.eta - 1).map_err(|e| e.to_string())?;
            ensure!(prev.xi < 1 || prev.zeta < 1, "eta not minimal for {a} {b} {p1} {p2}");
        }
    }
    let w = concat_triple(1, 0, 0, 2, 5).map_err(|e| e.to_string())?;
    ensure!((w.xi, w.zeta) == (10, 4), "worked example gives {w:?}");
    ensure!(1 + 4 + 5 == 10 && 2 * 5 == 10, "direct substitution");
    Ok("1000 random inputs exact; (1,0,0,2,5) -> (10,4)".into())
}

fn c11_construction() -> Outcome {
    let alpha = 1.0 / 3.0;
    let beta = 2f64.sqrt() - 1.0;
    let spec = build_paper_example(alpha, beta).map_err(|e| e.to_string())?;
    let ex = spec.paper_example().ok_or("not a paper example")?;
    let (fa, fb) = (ex.f_alpha(), ex.f_beta());
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    // (c): zeros exactly on C_alpha x {10} and C_beta x {-10}.
    for _ in 0..10_000 {
        let th = rng.gen_range(0.0..1.0);
        let t = rng.gen_range(-16.0..16.0);
        ensure!(ex.g(th, t) > 0.0, "g vanishes at ({th}, {t})");
        for (level, f) in [(10.0, fa), (-10.0, fb)] {
            let on = f.g_alpha(th) == 0.0;
            ensure!((ex.g(th, level) <= 1e-15) == on, "zero set mismatch at ({th}, {level})");
        }
    }
    let d = fb.denjoy().ok_or("beta should be a Denjoy lift")?;
    for i in -20..=20 {
        let (s, _) = d.interval(i).unwrap();
        ensure!(ex.g(s, -10.0) == 0.0, "C_beta endpoint of interval {i} not a zero");
        ensure!(ex.g(s, -10.01) > 0.0, "g vanishes off level -10");
    }
    for k in 0..3 {
        ensure!(ex.g(k as f64 / 3.0, 10.0) <= 1e-15, "C_alpha point {k}/3 not a zero");
    }
    // (d): g >= g_alpha on [9, 11], equality only at 10.
    for _ in 0..10_000 {
        let th = rng.gen_range(0.0..1.0);
        let t = rng.gen_range(9.0..11.0);
        ensure!(ex.g(th, t) > fa.g_alpha(th), "(d) fails at ({th}, {t})");
        ensure!(ex.g(th, -t) > fb.g_alpha(th), "(d) fails at ({th}, {})", -t);
        ensure!((ex.g(th, 10.0) - fa.g_alpha(th)).abs() <= 1e-15, "(d) equality fails at t = 10");
    }
    // (f): difference quotients well below 1.
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let th = rng.gen_range(0.0..1.0);
        let t = rng.gen_range(-16.0..16.0);
        worst = worst.max(((ex.g(th, t + step) - ex.g(th, t - step)) / (2.0 * step)).abs());
    }
    ensure!(worst < 0.5, "(f) slope {worst}");
    // (g): the isotopy is f_alpha above 5 and f_beta below -5.
    for _ in 0..10_000 {
        let x = rng.gen_range(-2.0..2.0);
        let t = rng.gen_range(5.0..40.0);
        ensure!((ex.phi(x, t) - fa.eval(x)).abs() <= 1e-12, "(g) fails at ({x}, {t})");
        ensure!((ex.phi(x, -t) - fb.eval(x)).abs() <= 1e-12, "(g) fails at ({x}, {})", -t);
    }
    // Level map 15 -> 14, onto.
    for _ in 0..10_000 {
        let x = rng.gen_range(0.0..1.0);
        let y = spec.eval(LiftPoint::new(x, 15.0)).unwrap();
        ensure!(y.t == 14.0, "level 15 maps to {}", y.t);
        let back = spec.inverse(LiftPoint::new(x, 14.0)).unwrap();
        ensure!(back.t == 15.0, "level 14 pulls back to {}", back.t);
    }
    Ok(format!("(c) (d) (f) (g) and level map hold; max |dg/dt| {worst:.3}"))
}

fn c12_basins() -> Outcome {
    // Irrational upper end so that C_alpha is a Cantor set with wandering intervals.
    let spec = build_paper_example(2f64.sqrt() - 1.0, 1.0 / 3.0).map_err(|e| e.to_string())?;
    let d = spec.paper_example().unwrap().f_alpha().denjoy().ok_or("alpha should be a Denjoy lift")?;
    let (s, len) = d.interval(0).unwrap();
    // One-sided: the lower threshold is out of reach in 10^4 steps.
    let never = -1e9;
    let mut y = LiftPoint::new(s, 8.0);
    let mut top = y.t;
    for _ in 0..10_000 {
        y = spec.inverse(y).map_err(|e| e.to_string())?;
        top = top.max(y.t);
    }
    ensure!(top < 10.5, "C_alpha orbit reached {top}");
    let cantor = classify_basin(&spec, AnnulusPoint::new(s, 8.0), 14.0, never, 10_000).map_err(|e| e.to_string())?;
    ensure!(cantor == Basin::Undetermined, "C_alpha point classified {cantor:?}");
    let center = AnnulusPoint::new(s + 0.5 * len, 8.0);
    let basin = classify_basin(&spec, center, 14.0, never, 10_000).map_err(|e| e.to_string())?;
    ensure!(basin == Basin::PlusBasin, "interval center classified {basin:?}");
    Ok(format!("C_alpha orbit peaks at {top:.6}; interval center is PlusBasin"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("prime-end rotation numbers 1/3 and sqrt2-1", c1_prime_ends),
        ("horseshoe fixed points and their rotations", c2_fixed_points),
        ("every p/q with q <= 6 realized and located", c3_all_rotations),
        ("a and b chain equivalent", c4_chain_transitivity),
        ("rotation interval of the horseshoe class", c5_rotation_interval),
        ("complete Lyapunov function and attractor identity", c6_lyapunov),
        ("rotation interval scales under h^2", c7_power_scaling),
        ("fixed point indices", c8_index),
        ("Atkinson small sums on the 01 orbit", c9_atkinson),
        ("concatenation counts", c10_concat),
        ("construction conditions and level map", c11_construction),
        ("one-sided basin checks", c12_basins),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
