//! Invariant battery run by `swipt validate` on a reduced copy of the scenario.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::FrequencyResponse;
use crate::error::Result;
use crate::gp::{
    condense, solve_gp, weights_from_point, GpProblem, Monomial, Posynomial, SolveStatus, SolverOptions, Variables,
};
use crate::harvester::{rate, zdc, zdc_matched, NoiseProfile};
use crate::optimizer::{
    brute_force, max_rate, optimize, waterfilling, wpt_only, Instance, OptimizationConfig, SwiptModel, SwiptState,
    Variant,
};
use crate::scenario::Scenario;
use crate::waveform::{PowerBudget, WaveformDesign};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Instance on the first `tones` tones of `inst`, with the budget scaled by
/// the kept share of tones.
fn truncate(inst: &Instance, tones: usize) -> Result<Instance> {
    let n = inst.num_tones();
    let gains = inst.channel.gains().rows(0, tones).into_owned();
    Instance::new(
        FrequencyResponse::from_gains(gains),
        inst.rect,
        NoiseProfile::new(inst.noise.sigma2[..tones].to_vec())?,
        PowerBudget::new(inst.budget.watts() * tones as f64 / n as f64)?,
    )
}

fn random_state(inst: &Instance, rng: &mut ChaCha8Rng) -> SwiptState {
    let (n, m) = (inst.num_tones(), inst.num_antennas());
    let scale = (2.0 * inst.budget.watts() / (2 * n * m) as f64).sqrt();
    let rho = rng.gen_range(0.05..0.95);
    SwiptState {
        s_p: DMatrix::from_fn(n, m, |_, _| scale * rng.gen_range(0.01..2.0)),
        s_i: DMatrix::from_fn(n, m, |_, _| scale * rng.gen_range(0.01..2.0)),
        rho,
        rho_bar: 1.0 - rho,
    }
}

fn am_gm(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<Check> {
    let model = SwiptModel::new(inst, Variant::SUPERPOSED)?;
    let z = model.zdc_posynomial();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_anchor = 0.0f64;
    let mut dominated = true;
    for _ in 0..20 {
        let x0 = model.point(&random_state(inst, rng), 1.0);
        let hat = condense(z, &weights_from_point(z, &x0)?)?;
        worst_anchor = worst_anchor.max((hat.eval(&x0)? / z.eval(&x0)? - 1.0).abs());
        for _ in 0..10 {
            let x = model.point(&random_state(inst, rng), 1.0);
            let (zv, hv) = (z.eval(&x)?, hat.eval(&x)?);
            dominated &= hv <= zv * (1.0 + 1e-12);
            worst_gap = worst_gap.max(hv / zv - 1.0);
        }
    }
    Ok(check(
        "AM-GM lower bound and tightness",
        dominated && worst_anchor < 1e-10,
        format!("max monomial/posynomial - 1 = {worst_gap:.2e}, anchor error = {worst_anchor:.2e}"),
    ))
}

fn matched_phase_audit(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut dominated = true;
    for _ in 0..10 {
        let s = random_state(inst, rng);
        let matched = WaveformDesign::matched(s.s_p.clone(), s.s_i.clone(), s.rho, &inst.channel)?;
        let z_closed = zdc_matched(&s.s_p, &s.s_i, s.rho, inst.amplitudes(), &inst.rect)?;
        let z_general = zdc(&matched, &inst.channel, &inst.rect)?;
        worst = worst.max((z_closed / z_general - 1.0).abs());
        let (n, m) = matched.shape();
        let jitter = |base: &DMatrix<f64>, rng: &mut ChaCha8Rng| {
            DMatrix::from_fn(n, m, |i, j| base[(i, j)] + rng.gen_range(-1.0..1.0))
        };
        let phi_p = jitter(&matched.phi_p, rng);
        let phi_i = jitter(&matched.phi_i, rng);
        let off = WaveformDesign::new(s.s_p, s.s_i, phi_p, phi_i, s.rho)?;
        dominated &= zdc(&off, &inst.channel, &inst.rect)? <= z_general * (1.0 + 1e-12);
    }
    Ok(check(
        "matched-phase closed form",
        worst < 1e-10 && dominated,
        format!("max relative error = {worst:.2e}, perturbed phases never exceed matched: {dominated}"),
    ))
}

fn gp_battery() -> Result<Check> {
    let solve = |gp: &GpProblem, x0: &[f64]| solve_gp(gp, x0, &SolverOptions::default());
    let mut worst = 0.0f64;
    let mut all_optimal = true;

    // min x + y  s.t.  1/(xy) <= 1  ->  2
    let mut v = Variables::new();
    let (x, y) = (v.add("x"), v.add("y"));
    let obj = Posynomial::from_terms(vec![Monomial::var(x), Monomial::var(y)]);
    let mut gp = GpProblem::new(v, obj);
    gp.add_le(Monomial::new(1.0, [(x, -1.0), (y, -1.0)]));
    let sol = solve(&gp, &[2.0, 2.0])?;
    all_optimal &= sol.status == SolveStatus::Optimal;
    worst = worst.max((sol.objective_value / 2.0 - 1.0).abs());

    // min 1/(xy)  s.t.  x + y <= 1  ->  4
    let mut v = Variables::new();
    let (x, y) = (v.add("x"), v.add("y"));
    let mut gp = GpProblem::new(v, Monomial::new(1.0, [(x, -1.0), (y, -1.0)]));
    gp.add_le(Posynomial::from_terms(vec![Monomial::var(x), Monomial::var(y)]));
    let sol = solve(&gp, &[0.2, 0.3])?;
    all_optimal &= sol.status == SolveStatus::Optimal;
    worst = worst.max((sol.objective_value / 4.0 - 1.0).abs());

    // min x^-1 y^-2  s.t.  x + 2y <= 3, x = 1  ->  y = 1, value 1
    let mut v = Variables::new();
    let (x, y) = (v.add("x"), v.add("y"));
    let mut gp = GpProblem::new(v, Monomial::new(1.0, [(x, -1.0), (y, -2.0)]));
    gp.add_le(Posynomial::from_terms(vec![
        Monomial::new(1.0 / 3.0, [(x, 1.0)]),
        Monomial::new(2.0 / 3.0, [(y, 1.0)]),
    ]));
    gp.add_eq(Monomial::var(x));
    let sol = solve(&gp, &[1.0, 0.5])?;
    all_optimal &= sol.status == SolveStatus::Optimal;
    worst = worst.max((sol.objective_value - 1.0).abs());

    Ok(check(
        "closed-form GP battery",
        all_optimal && worst < 1e-6,
        format!("3 problems, max relative error = {worst:.2e}"),
    ))
}

fn endpoints(inst: &Instance) -> Result<Check> {
    let cfg = OptimizationConfig::default();
    let wf = waterfilling(inst)?;
    let r_max = max_rate(inst, Variant::SUPERPOSED)?;
    let top = optimize(
        inst,
        &OptimizationConfig {
            rate_floor: r_max,
            ..cfg.clone()
        },
    )?;
    let wf_rate = rate(&wf.s_i, 0.0, inst.amplitudes(), &inst.noise)?;
    let wpt = wpt_only(inst, &cfg)?;
    let bottom = optimize(inst, &cfg)?;
    let rate_err = (wf_rate / r_max - 1.0).abs().max((top.rate / r_max - 1.0).abs());
    let wpt_err = (bottom.zdc / wpt.zdc - 1.0).abs();
    Ok(check(
        "region endpoints",
        rate_err < 1e-9 && top.zdc == 0.0 && bottom.zdc >= wpt.zdc * (1.0 - 1e-9),
        format!("water-filling rate error = {rate_err:.2e}, zero-rate z_DC vs multisine-only = {wpt_err:.2e}"),
    ))
}

fn brute_gap(inst: &Instance) -> Result<Check> {
    let r = 0.5 * max_rate(inst, Variant::SUPERPOSED)?;
    let opt = optimize(
        inst,
        &OptimizationConfig {
            rate_floor: r,
            ..Default::default()
        },
    )?;
    let grid = brute_force(inst, r, 1.0 / 40.0)?;
    Ok(match grid {
        Some(b) => check(
            "brute-force comparison",
            opt.zdc >= b.zdc * (1.0 - 1e-6),
            format!(
                "N·M = {}, optimized {:.6e} vs grid best {:.6e} over {} points",
                inst.num_tones() * inst.num_antennas(),
                opt.zdc,
                b.zdc,
                b.evaluated
            ),
        ),
        None => check(
            "brute-force comparison",
            false,
            "no grid point meets the rate floor".into(),
        ),
    })
}

pub fn run_battery(scenario: &Scenario, seed: u64) -> Result<Vec<Check>> {
    let full = scenario.instance()?;
    let reduced = truncate(&full, full.num_tones().min(4))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        am_gm(&reduced, &mut rng)?,
        matched_phase_audit(&reduced, &mut rng)?,
        gp_battery()?,
        endpoints(&reduced)?,
    ];
    let m = full.num_antennas();
    if m <= 2 {
        checks.push(brute_gap(&truncate(&full, (2 / m).min(full.num_tones()))?)?);
    }
    Ok(checks)
}

pub fn cmd_validate(scenario: &Scenario, seed: u64) -> Result<i32> {
    let checks = run_battery(scenario, seed)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!(
            "{} {:width$}  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { 1 })
}
