//! Correction terms, retargeting weights and pseudo-outcomes for the
//! orthogonal loss at a fixed horizon.
//!
//! For a horizon `t` every row becomes a [`PseudoRow`] `(x, rho, phi)` and
//! the second stage minimises `sum rho (phi - g(x))^2`.

use rayon::prelude::*;

use crate::error::Result;
use crate::nuisance::FoldedNuisances;
use crate::types::{Dataset, NuisanceAtPoint, Observation, TildeEta};
use crate::weighting::{weight_partials, WeightScheme};

/// `xi_S(Z, eta_t)`: martingale-type correction of the event process up to
/// and including step `t`.
pub fn xi_s(obs: &Observation, nap: &NuisanceAtPoint, t: isize) -> f64 {
    let a = obs.arm();
    let mut acc = 0.0;
    for i in 0..=t.min(nap.t_max() as isize) {
        let iu = i as usize;
        if obs.t_tilde < iu {
            break;
        }
        let jump = if obs.t_tilde == iu && obs.delta_s == 1 { 1.0 } else { 0.0 };
        acc += (jump - nap.lambda_s[a][iu]) / (nap.s_floor(a, i) * nap.g_floor(a, i - 1));
    }
    acc
}

/// `xi_G(Z, eta_{t-1})`; `t_minus_1 = -1` is the empty sum.
pub fn xi_g(obs: &Observation, nap: &NuisanceAtPoint, t_minus_1: isize) -> f64 {
    let a = obs.arm();
    let mut acc = 0.0;
    for i in 0..=t_minus_1.min(nap.t_max() as isize) {
        let iu = i as usize;
        if obs.t_tilde < iu {
            break;
        }
        let jump = if obs.t_tilde == iu && obs.delta_g == 1 { 1.0 } else { 0.0 };
        acc += (jump - nap.lambda_g[a][iu]) / (nap.s_floor(a, i - 1) * nap.g_floor(a, i));
    }
    acc
}

/// Raw retargeting weight `rho(Z, eta_t)` (no guard).
pub fn rho(obs: &Observation, nap: &NuisanceAtPoint, scheme: WeightScheme, t: usize) -> f64 {
    let e = nap.tilde_eta(t);
    let wp = weight_partials(scheme, &e);
    let a = obs.arm();
    let af = f64::from(obs.a);
    let pi = nap.pi;
    // f + df/dpi (A - pi) collapses to (A - pi)^2 times the other factors
    // when the treatment factor is present; use that form directly.
    let mut r = if scheme.uses_treatment() {
        let rest = weight_partials(scheme, &TildeEta { pi: 0.5, ..e }).f_value * 4.0;
        (af - pi) * (af - pi) * rest
    } else {
        wp.f_value
    };
    let ds = wp.d_s(a);
    let dg = wp.d_g(a);
    if ds != 0.0 || dg != 0.0 {
        let prev = t as isize - 1;
        let inv = af / pi + (1.0 - af) / (1.0 - pi);
        let s_term = if ds != 0.0 { ds * e.s_prev(a) * xi_s(obs, nap, prev) } else { 0.0 };
        let g_term = if dg != 0.0 { dg * e.g_prev(a) * xi_g(obs, nap, prev) } else { 0.0 };
        r -= inv * (s_term + g_term);
    }
    r
}

/// `phi` from its ingredients.
#[allow(clippy::too_many_arguments)]
pub fn phi_from_parts(s1: f64, s0: f64, s_a: f64, pi: f64, a: u8, xi_s: f64, f_value: f64, rho: f64) -> f64 {
    let centred = f64::from(a) - pi;
    s1 - s0 - centred * xi_s * s_a * f_value / (pi * (1.0 - pi) * rho)
}

/// Pseudo-outcome `phi(Z, eta_t)` for a given (possibly guarded) weight.
pub fn phi(obs: &Observation, nap: &NuisanceAtPoint, scheme: WeightScheme, rho_value: f64, t: usize) -> f64 {
    let f = weight_partials(scheme, &nap.tilde_eta(t)).f_value;
    let a = obs.arm();
    phi_from_parts(
        nap.s[1][t],
        nap.s[0][t],
        nap.s[a][t],
        nap.pi,
        obs.a,
        xi_s(obs, nap, t as isize),
        f,
        rho_value,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoRow {
    pub x: Vec<f64>,
    /// Weight used in the loss (after guarding).
    pub rho: f64,
    pub phi: f64,
    pub f_value: f64,
    /// `xi_S(Z, eta_t)` at the row's horizon.
    pub xi_s: f64,
    /// `xi_G(Z, eta_{t-1})`.
    pub xi_g: f64,
    pub raw_rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoConfig {
    /// Rows with `|rho| < rho_guard * f` have `rho` floored to that value,
    /// keeping its sign.
    pub rho_guard: f64,
    /// Zero the loss weight of rows with negative `rho`.
    pub clamp_negative_rho: bool,
}

impl Default for PseudoConfig {
    fn default() -> Self {
        Self {
            rho_guard: 1e-3,
            clamp_negative_rho: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GuardReport {
    pub n_guarded: usize,
    pub n_negative_rho: usize,
}

/// Applies the guard. Returns `(rho used in phi, loss weight, guarded)`.
fn guard(raw: f64, f: f64, cfg: &PseudoConfig) -> (f64, f64, bool) {
    let floor = cfg.rho_guard * f;
    let (r, guarded) = if raw.abs() < floor {
        (if raw < 0.0 { -floor } else { floor }, true)
    } else {
        (raw, false)
    };
    let w = if cfg.clamp_negative_rho && r < 0.0 { 0.0 } else { r };
    (r, w, guarded)
}

fn finish(rows: Vec<(PseudoRow, bool)>) -> (Vec<PseudoRow>, GuardReport) {
    let mut rep = GuardReport::default();
    let rows = rows
        .into_iter()
        .map(|(r, g)| {
            rep.n_guarded += usize::from(g);
            rep.n_negative_rho += usize::from(r.raw_rho < 0.0);
            r
        })
        .collect();
    (rows, rep)
}

fn pseudo_row(obs: &Observation, nap: &NuisanceAtPoint, scheme: WeightScheme, t: usize, cfg: &PseudoConfig) -> (PseudoRow, bool) {
    let f = weight_partials(scheme, &nap.tilde_eta(t)).f_value;
    let raw = rho(obs, nap, scheme, t);
    let (r, w, guarded) = guard(raw, f, cfg);
    let xs = xi_s(obs, nap, t as isize);
    let a = obs.arm();
    let phi = phi_from_parts(nap.s[1][t], nap.s[0][t], nap.s[a][t], nap.pi, obs.a, xs, f, r);
    (
        PseudoRow {
            x: obs.x.clone(),
            rho: w,
            phi,
            f_value: f,
            xi_s: xs,
            xi_g: xi_g(obs, nap, t as isize - 1),
            raw_rho: raw,
        },
        guarded,
    )
}

/// Pseudo-rows from per-row nuisances (`naps[i]` belongs to row `i`).
pub fn pseudo_rows_from_points(
    d: &Dataset,
    naps: &[NuisanceAtPoint],
    scheme: WeightScheme,
    t: usize,
    cfg: &PseudoConfig,
) -> (Vec<PseudoRow>, GuardReport) {
    assert_eq!(d.len(), naps.len(), "one nuisance point per row");
    assert!(t <= d.t_max(), "horizon beyond grid");
    let rows = d
        .rows()
        .par_iter()
        .zip(naps.par_iter())
        .map(|(o, n)| pseudo_row(o, n, scheme, t, cfg))
        .collect();
    finish(rows)
}

/// Pseudo-rows with every row evaluated by its out-of-fold nuisance set.
pub fn build_pseudo_rows(
    d: &Dataset,
    fns: &FoldedNuisances,
    scheme: WeightScheme,
    t: usize,
    cfg: &PseudoConfig,
) -> Result<(Vec<PseudoRow>, GuardReport)> {
    let naps = fns.evaluate_rows(d)?;
    Ok(pseudo_rows_from_points(d, &naps, scheme, t, cfg))
}

/// Restricted-mean pseudo-rows for horizon `h`: one weight `rho(Z, eta_h)`
/// built from `f(tilde_eta_h)`, and the target summed over `t = 0..=h`.
pub fn rmst_rows_from_points(
    d: &Dataset,
    naps: &[NuisanceAtPoint],
    scheme: WeightScheme,
    h: usize,
    cfg: &PseudoConfig,
) -> (Vec<PseudoRow>, GuardReport) {
    assert_eq!(d.len(), naps.len(), "one nuisance point per row");
    assert!(h <= d.t_max(), "horizon beyond grid");
    let rows = d
        .rows()
        .par_iter()
        .zip(naps.par_iter())
        .map(|(obs, nap)| {
            let f = weight_partials(scheme, &nap.tilde_eta(h)).f_value;
            let raw = rho(obs, nap, scheme, h);
            let (r, w, guarded) = guard(raw, f, cfg);
            let a = obs.arm();
            let phi = (0..=h)
                .map(|t| {
                    let xs = xi_s(obs, nap, t as isize);
                    phi_from_parts(nap.s[1][t], nap.s[0][t], nap.s[a][t], nap.pi, obs.a, xs, f, r)
                })
                .sum();
            (
                PseudoRow {
                    x: obs.x.clone(),
                    rho: w,
                    phi,
                    f_value: f,
                    xi_s: xi_s(obs, nap, h as isize),
                    xi_g: xi_g(obs, nap, h as isize - 1),
                    raw_rho: raw,
                },
                guarded,
            )
        })
        .collect();
    finish(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuisance::evaluate_rows_with;
    use crate::synthetic::{generate, Scenario, ScenarioSpec, Setting};
    use crate::weighting::weight;
    use proptest::prelude::*;

    fn toy() -> NuisanceAtPoint {
        NuisanceAtPoint::from_hazards(0.5, [vec![0.2, 0.3], vec![0.2, 0.3]], [vec![0.1, 0.1], vec![0.1, 0.1]], 0.01)
    }

    #[test]
    fn xi_s_hand_value() {
        let obs = Observation::new(vec![0.0], 1, 1, 1, 0);
        let expected = -0.2 / 0.8 + 0.7 / (0.56 * 0.9);
        assert!((xi_s(&obs, &toy(), 1) - expected).abs() < 1e-14);
        assert!((expected - 1.1389).abs() < 1e-4);
    }

    #[test]
    fn xi_g_hand_value_and_empty_sum() {
        let obs = Observation::new(vec![0.0], 1, 1, 1, 0);
        assert_eq!(xi_g(&obs, &toy(), -1), 0.0);
        assert!((xi_g(&obs, &toy(), 0) + 0.1 / 0.9).abs() < 1e-14);
    }

    #[test]
    fn zero_hazards_give_zero_corrections() {
        let nap = NuisanceAtPoint::from_hazards(0.4, [vec![0.0; 4], vec![0.0; 4]], [vec![0.0; 4], vec![0.0; 4]], 0.01);
        let obs = Observation::new(vec![0.0], 0, 3, 0, 1);
        assert_eq!(xi_s(&obs, &nap, 2), 0.0);
        let obs = Observation::new(vec![0.0], 0, 3, 1, 0);
        assert_eq!(xi_g(&obs, &nap, 3), 0.0);
    }

    #[test]
    fn censoring_scheme_rho_hand_value() {
        // pi = 0.5, A = 1, G_0 = 0.8 in both arms: rho = 0.64 (1 - 2 xi_G).
        let nap = NuisanceAtPoint::from_hazards(0.5, [vec![0.0, 0.0], vec![0.0, 0.0]], [vec![0.2, 0.1], vec![0.2, 0.1]], 0.01);
        let obs = Observation::new(vec![0.0], 1, 1, 1, 0);
        let xg = xi_g(&obs, &nap, 0);
        assert!((xg + 0.25).abs() < 1e-15);
        let r = rho(&obs, &nap, WeightScheme::C, 1);
        assert!((r - 0.64 * (1.0 - 2.0 * xg)).abs() < 1e-14);
        let at = |xg: f64| 0.64 * (1.0 - 2.0 * xg);
        assert!((at(0.1) - 0.512).abs() < 1e-15);
    }

    #[test]
    fn phi_hand_value() {
        let v = phi_from_parts(0.6, 0.5, 0.6, 0.5, 1, 1.1389, 1.0, 1.0);
        assert!((v - (0.1 - 0.5 * 1.1389 * 0.6 / 0.25)).abs() < 1e-14);
        assert!((v + 1.2667).abs() < 1e-4);
        assert_eq!(phi_from_parts(0.6, 0.5, 0.6, 0.3, 0, 0.0, 0.7, 0.2), 0.6 - 0.5);
    }

    fn arb_point() -> impl Strategy<Value = (Observation, NuisanceAtPoint, usize)> {
        let tm = 5usize;
        (
            0.02f64..0.98,
            proptest::collection::vec(0.0f64..0.6, 4 * (tm + 1)),
            0u8..2,
            0usize..=tm,
            0u8..3,
            0usize..=tm,
        )
            .prop_map(move |(pi, hz, a, tt, kind, t)| {
                let c = |k: usize| hz[k * (tm + 1)..(k + 1) * (tm + 1)].to_vec();
                let nap = NuisanceAtPoint::from_hazards(pi, [c(0), c(1)], [c(2), c(3)], 0.01);
                let (ds, dg) = match kind {
                    0 => (1, 0),
                    1 => (0, 1),
                    _ => (1, 1),
                };
                (Observation::new(vec![0.3], a, tt, ds, dg), nap, t)
            })
    }

    proptest! {
        #[test]
        fn none_scheme_reduces_to_dr_form((obs, nap, t) in arb_point()) {
            let r = rho(&obs, &nap, WeightScheme::None, t);
            prop_assert_eq!(r, 1.0);
            let direct = phi(&obs, &nap, WeightScheme::None, r, t);
            let a = obs.arm();
            let s_a = nap.s[a][t];
            let y = s_a * (1.0 - xi_s(&obs, &nap, t as isize));
            let pi = nap.pi;
            let dr = nap.s[1][t] - nap.s[0][t] + (f64::from(obs.a) - pi) / (pi * (1.0 - pi)) * (y - s_a);
            prop_assert!((direct - dr).abs() <= 1e-10 * dr.abs().max(1.0));
        }

        #[test]
        fn treatment_scheme_is_r_loss((obs, nap, t) in arb_point(), g in -1.0f64..1.0) {
            let r = rho(&obs, &nap, WeightScheme::T, t);
            let centred = f64::from(obs.a) - nap.pi;
            prop_assert_eq!(r, centred * centred);
            let p = phi(&obs, &nap, WeightScheme::T, r, t);
            let y = nap.s[obs.arm()][t] * (1.0 - xi_s(&obs, &nap, t as isize));
            let m = nap.pi * nap.s[1][t] + (1.0 - nap.pi) * nap.s[0][t];
            let ytil = centred * p;
            prop_assert!((ytil - (y - m)).abs() <= 1e-10 * (y - m).abs().max(1.0));
            let lhs = r * (p - g).powi(2);
            let rhs = (ytil - centred * g).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }

        #[test]
        fn horizon_zero_neutralises_c_and_s((obs, nap, _t) in arb_point()) {
            for s in [WeightScheme::C, WeightScheme::S, WeightScheme::CS] {
                prop_assert_eq!(rho(&obs, &nap, s, 0), 1.0);
                prop_assert_eq!(weight(s, &nap.tilde_eta(0)), 1.0);
            }
        }
    }

    #[test]
    fn built_rows_are_finite_and_guard_counts_behave() {
        let (d, gt) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::FULL, n: 1000, seed: 5 });
        let naps = evaluate_rows_with(&gt, &d, 0.01).unwrap();
        for s in WeightScheme::ALL {
            let (rows, rep) = pseudo_rows_from_points(&d, &naps, s, 3, &PseudoConfig::default());
            assert_eq!(rows.len(), 1000);
            assert!(rows.iter().all(|r| r.rho.is_finite() && r.phi.is_finite()));
            if s == WeightScheme::None {
                assert!(rows.iter().all(|r| r.rho == 1.0));
                assert_eq!(rep, GuardReport::default());
            }
            if s == WeightScheme::T {
                assert!(rows.iter().all(|r| r.rho > 0.0 && r.rho <= 0.9801));
                assert_eq!(rep.n_guarded, 0);
            }
        }
    }

    #[test]
    fn guard_preserves_sign_and_clamp_zeroes_negatives() {
        let cfg = PseudoConfig::default();
        assert_eq!(guard(-1e-9, 1.0, &cfg), (-1e-3, -1e-3, true));
        assert_eq!(guard(0.0, 1.0, &cfg), (1e-3, 1e-3, true));
        assert_eq!(guard(0.5, 1.0, &cfg), (0.5, 0.5, false));
        let clamp = PseudoConfig { clamp_negative_rho: true, ..cfg };
        assert_eq!(guard(-0.5, 1.0, &clamp), (-0.5, 0.0, false));
    }

    #[test]
    fn rmst_at_zero_matches_single_horizon() {
        let (d, gt) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::LOW_SURVIVAL, n: 200, seed: 2 });
        let naps = evaluate_rows_with(&gt, &d, 0.01).unwrap();
        for s in WeightScheme::ALL {
            let (a, _) = pseudo_rows_from_points(&d, &naps, s, 0, &PseudoConfig::default());
            let (b, _) = rmst_rows_from_points(&d, &naps, s, 0, &PseudoConfig::default());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rmst_none_is_sum_of_dr_targets() {
        let (d, gt) = generate(&ScenarioSpec { scenario: Scenario::One, setting: Setting::LOW_SURVIVAL, n: 200, seed: 3 });
        let naps = evaluate_rows_with(&gt, &d, 0.01).unwrap();
        let (b, _) = rmst_rows_from_points(&d, &naps, WeightScheme::None, 4, &PseudoConfig::default());
        for (i, row) in b.iter().enumerate() {
            let sum: f64 = (0..=4)
                .map(|t| pseudo_rows_from_points(&d.subset(&[i]), &naps[i..=i], WeightScheme::None, t, &PseudoConfig::default()).0[0].phi)
                .sum();
            assert!((row.phi - sum).abs() < 1e-12);
            assert_eq!(row.rho, 1.0);
        }
    }
}
