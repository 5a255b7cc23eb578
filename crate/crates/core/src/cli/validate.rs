//! Cross-route checks behind `validate`.
//!
//! Every check that involves the front chain takes the generator as an
//! argument, so a wrong intensity matrix shows up as failed checks.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::bessel::{upsilon, upsilon_analytic};
use crate::constants::{avg_residual_time, avg_residual_time_direct, gamma_residuals, headline_constants};
use crate::front_chain::{
    check_sequence_recursions, closed_form_distribution, scaled_difference, seq, seq_via_upsilon,
    stationary_truncated_solve_with, Generator, SeqKind,
};
use crate::reference;
use crate::simulator::estimate::{total_variation, uniform_sample_times};
use crate::simulator::{
    empirical_front_distribution, empirical_residual_time, estimate_tau, simulate_front_chain_with, Horizon,
    InitialCondition, SimConfig, SimMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    /// Exact and linear-algebra checks only.
    Quick,
    /// Quick checks plus Monte Carlo.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, outcome: Result<String, String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(Check { name, passed, detail });
    }
}

pub const MC_HEIGHT: u64 = 20_000;
pub const MC_REPLICATES: u32 = 16;
pub const MC_T_MAX: f64 = 200_000.0;
pub const MC_SAMPLES: usize = 10_000;

pub fn validate(level: Level, seed: u64, gen: &dyn Generator, jobs: Option<usize>) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.push("generator rows", check_rows(gen));
    report.push("closed form is stationary", check_balance(gen));
    report.push("headline constants", check_constants());
    report.push("sequence tables", check_tables());
    report.push("two routes and sequence recursions", check_routes());
    report.push("truncated solve vs closed form", check_truncated(gen));
    report.push("upsilon unit step and wronskian", check_wronskian());
    report.push("residual coefficients", check_gamma());
    if level == Level::Full {
        report.push("monte carlo time constant", check_mc_tau(seed, jobs));
        report.push("monte carlo front distribution", check_mc_front(seed, gen));
    }
    report
}

fn check_rows(gen: &dyn Generator) -> Result<String, String> {
    for n in 0..=60 {
        if !gen.row(n).is_valid() {
            return Err(format!("row {n} is not a valid intensity row"));
        }
    }
    Ok("rows 0..=60 are valid".into())
}

fn check_balance(gen: &dyn Generator) -> Result<String, String> {
    let dist = closed_form_distribution::<f64>(25, 1e-14).map_err(|e| e.to_string())?;
    let worst = dist.balance_residuals(gen)[..24].iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if worst <= 1e-10 {
        Ok(format!("max |(ΠQ)_j| = {worst:.2e} for j < 24"))
    } else {
        Err(format!("max |(ΠQ)_j| = {worst:.2e} exceeds 1e-10"))
    }
}

fn check_constants() -> Result<String, String> {
    let c = headline_constants::<f64>(1e-12).map_err(|e| e.to_string())?;
    let pairs = [
        ("pi0", &c.pi0, reference::PI0),
        ("tau", &c.tau, reference::TAU),
        ("T", &c.t_resid, reference::T_RESID),
    ];
    for (name, got, want) in pairs {
        if (got.value - want).abs() > 1e-9 {
            return Err(format!("{name} = {} differs from {want}", got.value));
        }
    }
    Ok(format!("pi0 = {:.12}, tau = {:.12}, T = {:.12}", c.pi0.value, c.tau.value, c.t_resid.value))
}

fn eq_table(label: &str, got: impl Iterator<Item = BigInt>, want: &[i64]) -> Result<(), String> {
    for (i, (g, w)) in got.zip(want).enumerate() {
        if g != BigInt::from(*w) {
            return Err(format!("{label}: entry {i} is {g}, expected {w}"));
        }
    }
    Ok(())
}

fn check_tables() -> Result<String, String> {
    let s = |k, n| seq(k, n).map_err(|e| e.to_string());
    let a = (1..=9).map(|n| s(SeqKind::A, n)).collect::<Result<Vec<_>, _>>()?;
    let b = (1..=9).map(|n| s(SeqKind::B, n)).collect::<Result<Vec<_>, _>>()?;
    eq_table("a_n", a.into_iter(), &reference::TABLE_A)?;
    eq_table("b_n", b.into_iter(), &reference::TABLE_B)?;
    let diff = |k| {
        (2..=7)
            .map(|n| scaled_difference(k, n).ok().flatten().unwrap_or_default())
            .collect::<Vec<_>>()
    };
    eq_table("A_n", diff(SeqKind::A).into_iter(), &reference::TABLE_CAP_A)?;
    eq_table("B_n", diff(SeqKind::B).into_iter(), &reference::TABLE_CAP_B)?;
    eq_table("Υ(n,0)", (1..=7).map(|n| upsilon(n, 0)), &reference::TABLE_UPSILON_0)?;
    eq_table(
        "2Υ(n,3)+Υ(n,0)",
        (1..=7).map(|n| upsilon(n, 3) * 2 + upsilon(n, 0)),
        &reference::TABLE_UPSILON_COMBO,
    )?;
    Ok("both tables match".into())
}

fn check_routes() -> Result<String, String> {
    for n in 2..=200 {
        for kind in [SeqKind::A, SeqKind::B] {
            let direct = seq(kind, n).map_err(|e| e.to_string())?;
            let via = seq_via_upsilon(kind, n).map_err(|e| e.to_string())?;
            if direct != via {
                return Err(format!("{}_{n}: recursion and upsilon routes differ", kind.name()));
            }
        }
    }
    let recs = check_sequence_recursions(201).map_err(|e| e.to_string())?;
    if let Some(f) = recs.failures().next() {
        return Err(format!("{:?} recursion fails for {}_{}", f.recursion, f.kind.name(), f.n));
    }
    Ok(format!("n = 2..=200, {} recursion checks", recs.checks.len()))
}

fn check_truncated(gen: &dyn Generator) -> Result<String, String> {
    let solved = stationary_truncated_solve_with::<f64>(gen, 25).map_err(|e| e.to_string())?;
    let exact = closed_form_distribution::<f64>(20, 1e-14).map_err(|e| e.to_string())?;
    let worst = (0..=20).fold(0.0f64, |m, n| m.max((solved.probs[n] - exact.probs[n]).abs()));
    if worst > 1e-10 {
        return Err(format!("max difference {worst:.2e} over n <= 20"));
    }
    let d0 = (solved.probs[0] - reference::PI0).abs();
    if d0 > 1e-9 {
        return Err(format!("solved pi0 = {} is {d0:.2e} from {}", solved.probs[0], reference::PI0));
    }
    Ok(format!("K = 25, max difference {worst:.2e} over n <= 20"))
}

fn check_wronskian() -> Result<String, String> {
    let mut worst = 0.0f64;
    for n in 0..=10u32 {
        if upsilon(i64::from(n) + 1, n) != BigInt::from(1) {
            return Err(format!("Υ({}, {n}) != 1", n + 1));
        }
        let w = upsilon_analytic::<f64>(n + 1, n, 1e-11).map_err(|e| e.to_string())?;
        worst = worst.max((w.value - 1.0).abs());
    }
    if worst <= 1e-9 {
        Ok(format!("max |π W - 1| = {worst:.2e}"))
    } else {
        Err(format!("max |π W - 1| = {worst:.2e}"))
    }
}

fn check_gamma() -> Result<String, String> {
    let g = gamma_residuals(100);
    if g[1].value != BigRational::new(2.into(), 3.into()) {
        return Err(format!("gamma_1 = {}", g[1].value));
    }
    let mut fact = BigInt::from(6);
    for n in 2..=100usize {
        fact *= BigInt::from(n + 2);
        if &g[n].value - &g[n - 1].value != BigRational::new(1.into(), fact.clone()) {
            return Err(format!("gamma_{n} - gamma_{} != 1/{}!", n - 1, n + 2));
        }
    }
    let direct = avg_residual_time_direct::<f64>(30, 1e-13).map_err(|e| e.to_string())?;
    let series = avg_residual_time::<f64>(1e-12).map_err(|e| e.to_string())?;
    let d = (direct.value - series.value).abs();
    if d > 1e-9 || (direct.value - reference::T_RESID).abs() > 1e-9 {
        return Err(format!("direct sum {} vs series {}", direct.value, series.value));
    }
    Ok(format!("increments exact for n <= 100, direct sum {:.12}", direct.value))
}

fn check_mc_tau(seed: u64, jobs: Option<usize>) -> Result<String, String> {
    let both = SimConfig::new(seed, SimMode::FppDijkstra, Horizon::Height(MC_HEIGHT)).with_replicates(MC_REPLICATES);
    // independent seeds, so the standard errors combine in quadrature
    let single = SimConfig::new(seed.wrapping_add(1), SimMode::FppDijkstra, Horizon::Height(MC_HEIGHT))
        .with_replicates(MC_REPLICATES)
        .with_initial(InitialCondition::SingleNode);
    let a = estimate_tau(&both, jobs).map_err(|e| e.to_string())?.tau;
    let b = estimate_tau(&single, jobs).map_err(|e| e.to_string())?.tau;
    if !a.within_sigmas(reference::TAU, 4.0) {
        return Err(format!("tau = {} ± {} is {:.1} se from {}", a.mean, a.std_err, a.z_score(reference::TAU), reference::TAU));
    }
    let se = a.std_err.hypot(b.std_err);
    if (a.mean - b.mean).abs() > 4.0 * se {
        return Err(format!("two-node {} vs single-node {} (combined se {se:.2e})", a.mean, b.mean));
    }
    Ok(format!("tau = {:.5} ± {:.1e}, single-node {:.5} ± {:.1e}", a.mean, a.std_err, b.mean, b.std_err))
}

fn check_mc_front(seed: u64, gen: &dyn Generator) -> Result<String, String> {
    let cfg = SimConfig::new(seed, SimMode::FrontChain, Horizon::Time(MC_T_MAX));
    let traj = simulate_front_chain_with(gen, &cfg, 0).map_err(|e| e.to_string())?;
    let dist = empirical_front_distribution(&traj, cfg.burn_in).map_err(|e| e.to_string())?;
    let p0 = &dist[0];
    if !p0.within_sigmas(reference::PI0, 4.0) {
        return Err(format!("state-0 fraction {} ± {} vs {}", p0.mean, p0.std_err, reference::PI0));
    }
    let exact = closed_form_distribution::<f64>(15, 1e-14).map_err(|e| e.to_string())?;
    let emp: Vec<f64> = (0..=15).map(|n| dist.get(n).map_or(0.0, |d| d.mean)).collect();
    let tv = total_variation(&emp, &exact.probs);
    if tv >= 0.01 {
        return Err(format!("TV distance {tv:.4} on states 0..=15"));
    }
    let times = uniform_sample_times(seed, u64::MAX, MC_SAMPLES, cfg.burn_in, traj.total_time);
    let r = empirical_residual_time(&traj, &times);
    let targets = [(None, reference::T_RESID), (Some(0), 0.5), (Some(1), 2.0 / 3.0)];
    for (state, want) in targets {
        let est = match state {
            None => &r.overall,
            Some(s) => r.by_state.get(&s).ok_or(format!("no samples in state {s}"))?,
        };
        if !est.within_sigmas(want, 4.0) {
            return Err(format!("{} = {} ± {} vs {want}", est.quantity.label(), est.mean, est.std_err));
        }
    }
    Ok(format!("pi0 {:.4} ± {:.1e}, TV {tv:.4}, T {:.4} ± {:.1e}", p0.mean, p0.std_err, r.overall.mean, r.overall.std_err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front_chain::{q_row, LadderGenerator, QRow};

    struct Corrupt;

    impl Generator for Corrupt {
        fn row(&self, n: usize) -> QRow {
            let mut r = q_row(n);
            if n == 2 {
                // move one unit of rate from 2 -> 0 to 2 -> 1; the row stays valid
                *r.entries.get_mut(&0).unwrap() -= 1;
                *r.entries.get_mut(&1).unwrap() += 1;
            }
            r
        }
    }

    #[test]
    fn quick_passes_on_the_ladder() {
        let report = validate(Level::Quick, 0, &LadderGenerator, None);
        assert!(report.all_passed(), "{:#?}", report.checks);
    }

    #[test]
    fn quick_fails_on_a_corrupted_row() {
        let report = validate(Level::Quick, 0, &Corrupt, None);
        assert!(!report.all_passed());
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"closed form is stationary"));
        assert!(failed.contains(&"truncated solve vs closed form"));
    }
}
