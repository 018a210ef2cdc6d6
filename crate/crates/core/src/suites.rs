//! Seeded randomized suites over the checked inequalities and identities.
//!
//! Trial `t` draws from a ChaCha8 stream keyed by `(seed, t)`, so each trial
//! is reproducible on its own and results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycles::{self, Cocycle};
use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel};
use crate::growth;
use crate::linalg::{self, CVector, C64};
use crate::measures::{self, Measure};
use crate::repr::{self, RepSource, Spectral, UnitaryRep};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Eq1,
    Eq2,
    Concavity,
    Energy,
    Lemma,
    Theorem,
    Appendix,
    Return,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Eq1,
        Suite::Eq2,
        Suite::Concavity,
        Suite::Energy,
        Suite::Lemma,
        Suite::Theorem,
        Suite::Appendix,
        Suite::Return,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Eq1 => "eq1",
            Suite::Eq2 => "eq2",
            Suite::Concavity => "concavity",
            Suite::Energy => "energy",
            Suite::Lemma => "lemma",
            Suite::Theorem => "theorem",
            Suite::Appendix => "appendix",
            Suite::Return => "return",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            Error::parse("suite", format!("unknown suite {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub group: GroupModel,
    /// Walk measure; random admissible measures are drawn when absent
    /// (eq1, eq2, concavity) or the lazy walk is used (other suites).
    pub measure: Option<Measure>,
    /// Coefficient representation; drawn per trial when absent.
    pub rep: Option<RepSource>,
    pub trials: usize,
    pub seed: u64,
    pub budget: usize,
    /// Cyclic orders for the appendix suite.
    pub orders: Vec<u64>,
    /// Largest exponent for walk-based suites; clamped per family.
    pub n_max: Option<usize>,
}

impl SuiteConfig {
    pub fn new(suite: Suite, group: GroupModel) -> Self {
        SuiteConfig {
            suite,
            group,
            measure: None,
            rep: None,
            trials: 100,
            seed: 0,
            budget: crate::groups::DEFAULT_BUDGET,
            orders: vec![16, 64, 256],
            n_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub trial: usize,
    pub label: String,
    /// Non-negative exactly when the instance passes; the amount of slack.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub group: String,
    pub rep: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub worst_margin: f64,
    pub all_pass: bool,
    pub instances: Vec<InstanceResult>,
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn instance(trial: usize, label: String, margin: f64) -> InstanceResult {
    InstanceResult {
        trial,
        label,
        margin,
        holds: margin >= -tol::INEQUALITY,
    }
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    if config.trials == 0 {
        return Err(Error::parse("trials", "must be positive"));
    }
    let instances: Vec<InstanceResult> = match config.suite {
        Suite::Appendix => appendix_instances(config)?,
        Suite::Return => vec![return_instance(config)?],
        suite => {
            let results: Vec<Result<InstanceResult>> = (0..config.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(config.seed, t);
                    match suite {
                        Suite::Eq1 => eq1_trial(config, t, &mut rng),
                        Suite::Eq2 => eq2_trial(config, t, &mut rng),
                        Suite::Concavity => concavity_trial(config, t, &mut rng),
                        Suite::Energy => energy_trial(config, t, &mut rng),
                        Suite::Lemma => lemma_trial(config, t, &mut rng),
                        Suite::Theorem => theorem_trial(config, t, &mut rng),
                        Suite::Appendix | Suite::Return => unreachable!(),
                    }
                })
                .collect();
            results.into_iter().collect::<Result<_>>()?
        }
    };
    let passed = instances.iter().filter(|r| r.holds).count();
    let worst_margin = instances.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite: config.suite.to_string(),
        group: config.group.to_string(),
        rep: config.rep.as_ref().map(|r| match r {
            RepSource::Named(s) => s.clone(),
            RepSource::Explicit(_) => "explicit".to_string(),
        }),
        seed: config.seed,
        trials: instances.len(),
        passed,
        failed: instances.len() - passed,
        worst_margin,
        all_pass: passed == instances.len(),
        instances,
    })
}

/// Symmetric admissible measure on `{e} ∪ S` with random weights.
pub fn random_admissible<R: Rng>(model: &GroupModel, rng: &mut R) -> Result<Measure> {
    let gens = model.generators();
    let mut atoms = vec![(model.identity(), rng.gen_range(0.05..1.0))];
    for i in model.primal_generators() {
        let w = rng.gen_range(0.05..1.0);
        atoms.push((gens[i].clone(), w));
        let inv = model.inverse_generator(i);
        if inv != i {
            atoms.push((gens[inv].clone(), w));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    Measure::probability(model, atoms.into_iter().map(|(g, w)| (g, w / total)))
}

/// Probability measure on 1 to 8 random elements of the ball of radius 3.
fn random_measure<R: Rng>(model: &GroupModel, ball: &[GroupElement], rng: &mut R) -> Result<Measure> {
    let k = rng.gen_range(1..=8);
    let atoms: Vec<(GroupElement, f64)> = (0..k)
        .map(|_| (ball[rng.gen_range(0..ball.len())].clone(), rng.gen_range(0.01..1.0)))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    Measure::probability(model, atoms.into_iter().map(|(g, w)| (g, w / total)))
}

fn small_ball(model: &GroupModel) -> Result<Vec<GroupElement>> {
    Ok(model.ball(3, crate::groups::DEFAULT_BUDGET)?.elements)
}

fn walk_measure<R: Rng>(config: &SuiteConfig, rng: &mut R) -> Result<Measure> {
    match &config.measure {
        Some(m) => Ok(m.clone()),
        None => random_admissible(&config.group, rng),
    }
}

fn eq1_trial(config: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<InstanceResult> {
    let model = &config.group;
    let ball = small_ball(model)?;
    let p = random_measure(model, &ball, rng)?;
    let q = if rng.gen_bool(0.5) {
        let gens = model.generators();
        measures::translate(&gens[rng.gen_range(0..gens.len())], &p)?
    } else {
        random_measure(model, &ball, rng)?
    };
    let mut support: Vec<GroupElement> = p.support().into_iter().chain(q.support()).collect();
    support.sort();
    support.dedup();
    let f: BTreeMap<GroupElement, f64> = support.into_iter().map(|g| (g, rng.gen_range(0.0..2.0))).collect();
    let r = measures::check_eq1(|g| f[g], &p, &q)?;
    Ok(instance(t, format!("|supp p|={} |supp q|={}", p.len(), q.len()), r.margin))
}

fn eq2_trial(config: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<InstanceResult> {
    let model = &config.group;
    let mu = walk_measure(config, rng)?;
    let nu = if rng.gen_bool(0.5) {
        random_measure(model, &small_ball(model)?, rng)?
    } else {
        measures::convolution_power(&mu, rng.gen_range(0..=4))?
    };
    let support = mu.support();
    let g0 = support[rng.gen_range(0..support.len())].clone();
    let r = measures::check_eq2_with_budget(&mu, &nu, &g0, config.budget)?;
    Ok(instance(t, format!("g0={g0} |supp nu|={}", nu.len()), r.margin))
}

fn concavity_trial(config: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<InstanceResult> {
    let model = &config.group;
    let ball = small_ball(model)?;
    let p = random_measure(model, &ball, rng)?;
    let q = random_measure(model, &ball, rng)?;
    let delta = measures::delta_concavity(&p, &q)?;
    let bound = measures::concavity_lower_bound(&p, &q)?;
    let (a, b) = (rng.gen_range(0.0..1.0f64), rng.gen_range(0.0..1.0f64));
    let point = measures::pointwise_concavity_gap(a * a * a, b);
    let margin = (delta - bound).min(bound).min(point.gap - point.bound).min(point.bound);
    Ok(instance(t, format!("a={:.6} b={b:.6}", a * a * a), margin))
}

/// Default exponent cap per family, keeping supports well inside the budget.
fn family_n_cap(model: &GroupModel) -> usize {
    match model {
        GroupModel::FreeAbelian(1) | GroupModel::Cyclic(_) => 50,
        GroupModel::FreeAbelian(2) => 50,
        GroupModel::FreeAbelian(_) => 12,
        GroupModel::Heisenberg => 30,
        GroupModel::Free(_) => 6,
        GroupModel::Lamplighter => 10,
    }
}

fn n_cap(config: &SuiteConfig, suite_cap: usize) -> usize {
    let cap = family_n_cap(&config.group).min(suite_cap);
    config.n_max.map_or(cap, |n| n.min(cap)).max(1)
}

fn random_character<R: Rng>(model: &GroupModel, rng: &mut R) -> Result<UnitaryRep> {
    let values: Vec<C64> = model
        .primal_generators()
        .iter()
        .map(|_| match *model {
            GroupModel::Cyclic(n) => C64::from_polar(1.0, std::f64::consts::TAU * rng.gen_range(0..n) as f64 / n as f64),
            _ => C64::from_polar(1.0, std::f64::consts::PI * rng.gen_range(-1.0..1.0)),
        })
        .collect();
    UnitaryRep::character(model, &values)
}

/// The configured representation, or one of trivial of dimension 1 or 2, a
/// random character and trivial plus a random character.
fn trial_rep<R: Rng>(config: &SuiteConfig, rng: &mut R) -> Result<(UnitaryRep, String)> {
    let model = &config.group;
    if let Some(src) = &config.rep {
        let name = match src {
            RepSource::Named(s) => s.clone(),
            RepSource::Explicit(_) => "explicit".into(),
        };
        return Ok((src.resolve(model)?, name));
    }
    Ok(match rng.gen_range(0..4) {
        0 => (UnitaryRep::trivial(model, 1)?, "trivial".into()),
        1 => (UnitaryRep::trivial(model, 2)?, "trivial:2".into()),
        2 => (random_character(model, rng)?, "character".into()),
        _ => (
            UnitaryRep::trivial(model, 1)?.direct_sum(&random_character(model, rng)?)?,
            "trivial+character".into(),
        ),
    })
}

fn random_vector<R: Rng>(rng: &mut R, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Random combination of a basis of the harmonic cocycles.
fn random_harmonic<R: Rng>(rep: &UnitaryRep, mu: &Measure, rng: &mut R) -> Result<Cocycle> {
    let basis = cocycles::harmonic_space_basis(rep, mu)?;
    let mut b = Cocycle::zero(rep);
    for e in &basis {
        b = b.add(&e.scale(C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))))?;
    }
    Ok(b)
}

fn suite_measure(config: &SuiteConfig) -> Result<Measure> {
    match &config.measure {
        Some(m) => Ok(m.clone()),
        None => Measure::lazy(&config.group, 0.5),
    }
}

fn energy_trial(config: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<InstanceResult> {
    let mu = suite_measure(config)?;
    let (rep, name) = trial_rep(config, rng)?;
    let b = random_harmonic(&rep, &mu, rng)?;
    let n = rng.gen_range(1..=n_cap(config, 50));
    let r = cocycles::energy_identity_check(&b, &mu, n, config.budget)?;
    let margin = 1e-8 * r.rhs.max(1.0) - (r.lhs - r.rhs).abs();
    Ok(instance(t, format!("{name} n={n} lhs={:.12} rhs={:.12}", r.lhs, r.rhs), margin))
}

/// Exponents at which Cesaro averages of synthetic contractions are compared.
pub const CESARO_EXPONENTS: [usize; 6] = [1, 10, 100, 1000, 5000, 10_000];

/// Synthetic contraction `T` of dimension `1..=64` and unit `zeta`. When
/// `fixed` is false the spectrum lies in `[-1, 0.98]`, so `m({1}) = 0`;
/// otherwise eigenvalue 1 occurs with positive multiplicity.
pub fn synthetic_contraction<R: Rng>(rng: &mut R, fixed: bool) -> Result<Spectral> {
    let dim = rng.gen_range(1..=64);
    let mut spectrum: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=0.98)).collect();
    if fixed {
        let k = rng.gen_range(1..=dim.min(4));
        spectrum[..k].iter_mut().for_each(|t| *t = 1.0);
    }
    let t = repr::hermitian_with_spectrum(rng, &spectrum);
    let mut zeta = random_vector(rng, dim);
    zeta /= C64::new(linalg::norm(&zeta), 0.0);
    Spectral::new(&t, &zeta)
}

/// Agreement margin of direct and spectral Cesaro norms and, without fixed
/// vectors, the decay margin `0.01 |zeta| - value(10^4)`.
pub fn synthetic_margins(sp: &Spectral, fixed: bool) -> (f64, Option<f64>) {
    let direct = sp.cesaro_direct_profile(&CESARO_EXPONENTS);
    let worst = CESARO_EXPONENTS
        .iter()
        .zip(&direct)
        .map(|(&n, &d)| (d - sp.cesaro_spectral(n)).abs())
        .fold(0.0, f64::max);
    let agreement = 1e-7 - worst;
    let decay = (!fixed).then(|| 0.01 * direct[0] - direct[direct.len() - 1]);
    (agreement, decay)
}

fn lemma_trial(config: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<InstanceResult> {
    let fixed = rng.gen_bool(0.5);
    let sp = synthetic_contraction(rng, fixed)?;
    let (agreement, decay) = synthetic_margins(&sp, fixed);

    let mu = suite_measure(config)?;
    let (rep, name) = trial_rep(config, rng)?;
    let b = random_harmonic(&rep, &mu, rng)?;
    let n = rng.gen_range(1..=n_cap(config, 30));
    let cocycle_margin = match cocycles::lemma_quantity(&b, &mu, n, config.budget) {
        Ok(r) => 1e-7 - (r.direct - r.spectral).abs(),
        Err(Error::Consistency { left, right, .. }) => 1e-7 - (left - right).abs(),
        Err(e) => return Err(e),
    };
    let margin = agreement.min(decay.unwrap_or(f64::INFINITY)).min(cocycle_margin);
    Ok(instance(
        t,
        format!(
            "dim={} fixed={fixed} decay_margin={} {name} n={n}",
            sp.eigenvalues().len(),
            decay.map_or("-".into(), |d| format!("{d:.3e}"))
        ),
        margin,
    ))
}

fn theorem_trial(config: &SuiteConfig, t: usize, rng: &mut ChaCha8Rng) -> Result<InstanceResult> {
    let model = &config.group;
    let mu = suite_measure(config)?;
    let (rep, name) = trial_rep(config, rng)?;
    let b = random_harmonic(&rep, &mu, rng)?;
    let mut xi = random_vector(rng, rep.dim());
    xi /= C64::new(linalg::norm(&xi) * rng.gen_range(1.0..2.0), 0.0);
    let gens: Vec<GroupElement> = model.generators().into_iter().filter(|g| mu.contains(g)).collect();
    if gens.is_empty() {
        return Err(Error::Precondition("the measure charges no generator".into()));
    }
    let g = gens[rng.gen_range(0..gens.len())].clone();
    let n = rng.gen_range(1..=n_cap(config, 30));
    let r = cocycles::theorem_inequality_check(&b, &mu, &xi, &g, n, config.budget)?;
    let identity_margin = 1e-8 * (r.lhs.sqrt()).max(1.0) - r.identity_residual;
    Ok(instance(
        t,
        format!("{name} g={g} n={n} lhs={:.6e} mid={:.6e} rhs={:.6e}", r.lhs, r.mid, r.rhs),
        r.margin().min(identity_margin),
    ))
}

fn appendix_instances(config: &SuiteConfig) -> Result<Vec<InstanceResult>> {
    let family = cocycles::appendix_family(&config.orders)?;
    let mut out = Vec::new();
    let mut previous: Option<f64> = None;
    for (i, r) in family.reports.iter().enumerate() {
        let window = (r.energy - 2.0).min(4.0 - r.energy) + 1e-6;
        let defect = r.defect_bound + 1e-6 - r.defect;
        let decreasing = previous.map_or(f64::INFINITY, |p| p - r.defect);
        previous = Some(r.defect);
        out.push(instance(
            i,
            format!(
                "N={} eps={:.6e} energy={:.9} defect={:.6e} bound={:.6e}",
                config.orders[i], r.epsilon, r.energy, r.defect, r.defect_bound
            ),
            window.min(defect).min(decreasing),
        ));
    }
    Ok(out)
}

fn return_instance(config: &SuiteConfig) -> Result<InstanceResult> {
    let mu = suite_measure(config)?;
    let n = config.n_max.unwrap_or(50);
    let r = growth::return_probability_checks(&mu, n, config.budget)?;
    let last = r.checked.last().copied().unwrap_or(0);
    Ok(instance(
        0,
        format!("even n <= {last}{}", if r.truncated { " (budget)" } else { "" }),
        r.worst_peak_margin.min(r.worst_entropy_margin),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(suite: Suite, group: &str, trials: usize) -> SuiteReport {
        let mut c = SuiteConfig::new(suite, group.parse().unwrap());
        c.trials = trials;
        c.seed = 7;
        run_suite(&c).unwrap()
    }

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nosuch".parse::<Suite>(), Err(Error::Parse { .. })));
    }

    #[test]
    fn measure_suites_pass_on_every_family() {
        for group in ["zd:1", "zd:2", "heisenberg", "free:2", "lamplighter", "cyclic:12"] {
            for suite in [Suite::Eq1, Suite::Eq2, Suite::Concavity] {
                let r = run(suite, group, 40);
                assert!(r.all_pass, "{suite} on {group}: {r:?}");
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run(Suite::Eq2, "heisenberg", 30);
        let b = run(Suite::Eq2, "heisenberg", 30);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = {
            let mut c = SuiteConfig::new(Suite::Eq2, "heisenberg".parse().unwrap());
            c.trials = 30;
            c.seed = 8;
            run_suite(&c).unwrap()
        };
        assert_ne!(a.instances, c.instances);
    }

    #[test]
    fn cocycle_suites_pass() {
        for group in ["zd:1", "zd:2", "heisenberg"] {
            for suite in [Suite::Energy, Suite::Theorem] {
                let mut c = SuiteConfig::new(suite, group.parse().unwrap());
                c.trials = 6;
                c.n_max = Some(8);
                let r = run_suite(&c).unwrap();
                assert!(r.all_pass, "{suite} on {group}: {r:?}");
            }
        }
        let mut c = SuiteConfig::new(Suite::Lemma, "zd:1".parse().unwrap());
        c.trials = 4;
        c.rep = Some(RepSource::Named("char:i".into()));
        assert!(run_suite(&c).unwrap().all_pass);
    }

    #[test]
    fn appendix_and_return_suites() {
        let mut c = SuiteConfig::new(Suite::Appendix, "cyclic:16".parse().unwrap());
        c.orders = vec![8, 16, 32];
        let r = run_suite(&c).unwrap();
        assert!(r.all_pass && r.instances.len() == 3);
        let r = run(Suite::Return, "lamplighter", 1);
        assert!(r.all_pass);
    }
}
