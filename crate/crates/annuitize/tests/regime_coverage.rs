//! Randomized regime coverage: every regime tag is reached by some valid
//! parameter set, and on every sampled set the value functions satisfy value
//! matching, smooth pasting, the free-boundary ODE and payoff dominance.

mod common;

use std::collections::BTreeMap;

use annuitize::verify_oracles::tolerances;
use annuitize::{solve_shock, ShockRegime};
use common::{structural_residuals, Worst};

const ATTEMPTS: usize = 20_000;

#[test]
fn every_regime_is_reached_and_structurally_sound() {
    let mut by_regime: BTreeMap<&'static str, (usize, Worst)> = BTreeMap::new();
    let mut post_regimes: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    for p in common::sample_params(7, ATTEMPTS) {
        let sol = match solve_shock(&p) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{e}"));
                continue;
            }
        };
        let w = structural_residuals(&p, &sol);
        let entry = by_regime.entry(sol.regime.tag()).or_default();
        entry.0 += 1;
        entry.1.merge(w);
        *post_regimes.entry(sol.post_shock.regime.name()).or_default() += 1;
    }
    for (tag, (n, w)) in &by_regime {
        println!(
            "{tag:9} n={n:5} vm={:.1e} sp={:.1e} ode={:.1e} dom={:.1e}",
            w.value_matching, w.smooth_pasting, w.ode, w.dominance
        );
        assert!(w.value_matching < tolerances::VALUE_MATCHING, "{tag}: value matching {w:?}");
        assert!(w.smooth_pasting < tolerances::SMOOTH_PASTING, "{tag}: smooth pasting {w:?}");
        assert!(w.ode < tolerances::ODE, "{tag}: ODE residual {w:?}");
        assert!(w.dominance < tolerances::DOMINANCE, "{tag}: dominance {w:?}");
    }
    println!("post-shock regimes: {post_regimes:?}");
    let missing: Vec<_> = ShockRegime::ALL.iter().map(|r| r.tag()).filter(|t| !by_regime.contains_key(t)).collect();
    assert!(missing.is_empty(), "regimes never reached: {missing:?}");
    for name in ["StopEverywhere", "StopBelow", "StopAbove", "NeverStop", "StopOnlyAtZero"] {
        assert!(post_regimes.contains_key(name), "constant-force regime {name} never reached");
    }
    assert!(failures.is_empty(), "solver failures on valid parameters: {failures:?}");
}
