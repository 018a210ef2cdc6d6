//! Volume growth and entropy growth of random walks.
//!
//! Asymptotic quantities (liminfs) cannot be computed from finitely many
//! terms; every estimator here is a tail statistic over the computed range
//! and is labelled as a finite-sample estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{
    delta_concavity, entropy, l1_distance, translate, Measure, PowerOptions, Powers,
};
use crate::tol;

/// First index of the tail half of `1..=n_max`.
fn tail_start(n_max: usize) -> usize {
    n_max.div_ceil(2).max(1)
}

/// Finite-sample estimate of `liminf log|B_n| / log n`.
///
/// `ball_sizes[n] = |B_n|`. Returns the minimum over the tail half of the
/// local log-log slope `log(|B_n| / |B_m|) / log(n / m)` with `m = ceil(n/2)`.
/// For `|B_n| ~ C n^d` the slope tends to `d` at rate `O(1/n)`, whereas the
/// raw ratio (see [`log_ratio_tail_min`]) carries an `O(log C / log n)` bias.
pub fn weak_poly_exponent(ball_sizes: &[usize]) -> Result<f64> {
    if ball_sizes.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: ball_sizes.len(),
        });
    }
    let n_max = ball_sizes.len() - 1;
    let slope = |n: usize| {
        let m = n.div_ceil(2);
        (ball_sizes[n] as f64 / ball_sizes[m] as f64).ln() / (n as f64 / m as f64).ln()
    };
    Ok((tail_start(n_max).max(2)..=n_max)
        .map(slope)
        .fold(f64::INFINITY, f64::min))
}

/// Minimum of `log|B_n| / log n` over the tail half (`n >= 2`).
pub fn log_ratio_tail_min(ball_sizes: &[usize]) -> Result<f64> {
    if ball_sizes.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: ball_sizes.len(),
        });
    }
    let n_max = ball_sizes.len() - 1;
    Ok((tail_start(n_max).max(2)..=n_max)
        .map(|n| (ball_sizes[n] as f64).ln() / (n as f64).ln())
        .fold(f64::INFINITY, f64::min))
}

/// `H(mu^{*n})` for `n = 0, 1, ...`, stopping early on budget exhaustion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySequence {
    pub entropies: Vec<f64>,
    pub truncated: bool,
}

pub fn entropy_sequence(mu: &Measure, n_max: usize, budget: usize) -> Result<EntropySequence> {
    let mut powers = Powers::new(
        mu,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    );
    let mut entropies = vec![0.0];
    let mut truncated = false;
    for _ in 0..n_max {
        match powers.advance() {
            Ok(p) => entropies.push(entropy(p)),
            Err(Error::BudgetExceeded { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EntropySequence {
        entropies,
        truncated,
    })
}

/// `a_n = n (H(mu^{*n+1}) - H(mu^{*n}))` for `n = 1..`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Increments {
    /// `values[i]` is `a_{i+1}`.
    pub values: Vec<f64>,
    pub truncated: bool,
}

impl Increments {
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

fn increments_from(entropies: &[f64]) -> Vec<f64> {
    (1..entropies.len().saturating_sub(1))
        .map(|n| n as f64 * (entropies[n + 1] - entropies[n]))
        .collect()
}

pub fn entropy_increments(mu: &Measure, n_max: usize, budget: usize) -> Result<Increments> {
    mu.check_admissible()?;
    let seq = entropy_sequence(mu, n_max + 1, budget)?;
    Ok(Increments {
        values: increments_from(&seq.entropies),
        truncated: seq.truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlowEntropyEstimate {
    /// Minimum of `a_n` over `n_from..=n_to`; a finite-sample estimate.
    pub estimate: f64,
    pub n_from: usize,
    pub n_to: usize,
    pub truncated: bool,
}

/// Finite-sample estimate of `liminf n (H(mu^{*n+1}) - H(mu^{*n}))`: the
/// minimum of the increments over the tail half of the computed range.
pub fn slow_entropy_estimate(mu: &Measure, n_max: usize, budget: usize) -> Result<SlowEntropyEstimate> {
    let inc = entropy_increments(mu, n_max, budget)?;
    slow_entropy_from(&inc)
}

fn slow_entropy_from(inc: &Increments) -> Result<SlowEntropyEstimate> {
    let n_to = inc.values.len();
    if n_to == 0 {
        return Err(Error::Precondition("no entropy increments within budget".into()));
    }
    let n_from = tail_start(n_to);
    let estimate = inc.values[n_from - 1..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(SlowEntropyEstimate {
        estimate,
        n_from,
        n_to,
        truncated: inc.truncated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBound {
    pub entropy: f64,
    pub log_support: f64,
    pub holds: bool,
}

/// `H(mu^{*n}) <= log |supp mu^{*n}|`, on the exact (unpruned) power.
pub fn entropy_vs_log_support_check(mu: &Measure, n: usize, budget: usize) -> Result<SupportBound> {
    let p = crate::measures::convolution_power_with(
        mu,
        n,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    )?
    .measure;
    Ok(support_bound(&p))
}

fn support_bound(p: &Measure) -> SupportBound {
    let h = entropy(p);
    let log_support = (p.len() as f64).ln();
    SupportBound {
        entropy: h,
        log_support,
        holds: h <= log_support + tol::INEQUALITY,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnProbabilityReport {
    /// Even exponents that were checked.
    pub checked: Vec<usize>,
    /// `min_n (mu^{*n}(e) - max_{g != e} mu^{*n}(g))`.
    pub worst_peak_margin: f64,
    /// `min_n (H(mu^{*n}) + log mu^{*n}(e))`.
    pub worst_entropy_margin: f64,
    pub holds: bool,
    pub truncated: bool,
}

/// For even `n <= n_max`: `mu^{*n}(e) >= mu^{*n}(g)` for all `g`, and
/// `H(mu^{*n}) >= -log mu^{*n}(e)`.
pub fn return_probability_checks(mu: &Measure, n_max: usize, budget: usize) -> Result<ReturnProbabilityReport> {
    mu.check_admissible()?;
    if n_max < 2 {
        return Err(Error::Precondition("return probability checks need n_max >= 2".into()));
    }
    let e = mu.model().identity();
    let mut powers = Powers::new(
        mu,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    );
    let mut report = ReturnProbabilityReport {
        checked: Vec::new(),
        worst_peak_margin: f64::INFINITY,
        worst_entropy_margin: f64::INFINITY,
        holds: true,
        truncated: false,
    };
    while powers.exponent() + 2 <= n_max {
        let mut step = || -> Result<()> {
            powers.advance()?;
            powers.advance()?;
            Ok(())
        };
        match step() {
            Ok(()) => {}
            Err(err @ Error::BudgetExceeded { .. }) => {
                if report.checked.is_empty() {
                    return Err(err);
                }
                report.truncated = true;
                break;
            }
            Err(err) => return Err(err),
        }
        let p = powers.current();
        let at_e = p.mass_at(&e);
        let peak = p.iter().filter(|(g, _)| *g != e).map(|(_, w)| w).fold(0.0, f64::max);
        let peak_margin = at_e - peak;
        let entropy_margin = entropy(p) + at_e.ln();
        report.worst_peak_margin = report.worst_peak_margin.min(peak_margin);
        report.worst_entropy_margin = report.worst_entropy_margin.min(entropy_margin);
        report.checked.push(powers.exponent());
    }
    report.holds = report.worst_peak_margin >= -tol::INEQUALITY
        && report.worst_entropy_margin >= -tol::INEQUALITY;
    Ok(report)
}

/// Power of `n` multiplying `max_g |mu^{*n} - g mu^{*n}|_1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisplacementScaling {
    /// `n^{1/2}`: bounded liminf under slow entropy growth.
    #[default]
    RootN,
    /// `n^{-1/2}`: trivially bounded since the L1 distance is at most 2.
    InverseRootN,
}

impl DisplacementScaling {
    fn factor(self, n: usize) -> f64 {
        let r = (n as f64).sqrt();
        match self {
            DisplacementScaling::RootN => r,
            DisplacementScaling::InverseRootN => {
                if n == 0 {
                    0.0
                } else {
                    1.0 / r
                }
            }
        }
    }
}

fn max_generator_displacement(p: &Measure) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in p.model().generators() {
        worst = worst.max(l1_distance(p, &translate(&g, p)?)?);
    }
    Ok(worst)
}

/// `n^{±1/2} max_{|g| <= 1} |mu^{*n} - g mu^{*n}|_1`.
pub fn ek_displacement(mu: &Measure, n: usize, scaling: DisplacementScaling, budget: usize) -> Result<f64> {
    mu.check_admissible()?;
    let p = crate::measures::convolution_power_with(
        mu,
        n,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    )?
    .measure;
    Ok(scaling.factor(n) * max_generator_displacement(&p)?)
}

/// The displacement bound obtained by chaining the L1 concavity estimate with
/// the entropy-increment inequality, for every generator `g` charged by `mu`:
/// `sqrt(n) |p - g p|_1 <= sqrt(n) (16 delta(p, g p))^{1/2} <= (8 a_n / min{mu(e), mu(g)})^{1/2}`
/// with `p = mu^{*n}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementChain {
    pub n: usize,
    pub displacement: f64,
    pub via_delta: f64,
    pub via_increment: f64,
    pub holds: bool,
}

pub fn ek_chain_check(mu: &Measure, n: usize, budget: usize) -> Result<DisplacementChain> {
    mu.check_admissible()?;
    let opts = PowerOptions {
        budget,
        ..PowerOptions::default()
    };
    let p = crate::measures::convolution_power_with(mu, n, opts)?.measure;
    let next = crate::measures::convolve_with_budget(mu, &p, budget)?;
    let a_n = n as f64 * (entropy(&next) - entropy(&p));
    let root = (n as f64).sqrt();
    let at_e = mu.mass_at(&mu.model().identity());
    let mut chain = DisplacementChain {
        n,
        displacement: 0.0,
        via_delta: 0.0,
        via_increment: 0.0,
        holds: true,
    };
    for g in mu.model().generators() {
        let lambda = at_e.min(mu.mass_at(&g));
        if lambda <= 0.0 {
            continue;
        }
        let gp = translate(&g, &p)?;
        let d = root * l1_distance(&p, &gp)?;
        let via_delta = root * (16.0 * delta_concavity(&p, &gp)?).sqrt();
        let via_increment = (8.0 * a_n.max(0.0) / lambda).sqrt();
        let slack = tol::INEQUALITY * root.max(1.0);
        chain.holds &= d <= via_delta + slack && via_delta <= via_increment + slack;
        if d >= chain.displacement {
            chain.displacement = d;
            chain.via_delta = via_delta;
            chain.via_increment = via_increment;
        }
    }
    Ok(chain)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    /// `H(mu^{*n})`
    pub entropy: f64,
    /// `n (H(mu^{*n+1}) - H(mu^{*n}))`
    pub increment: f64,
    /// `mu^{*n}(e)`
    pub return_prob: f64,
    pub ek_displacement: f64,
}

/// Everything `growth` reports for one walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub group: String,
    pub n_max: usize,
    pub scaling: DisplacementScaling,
    /// `|B_n|` for `n = 0..`, possibly shorter than `n_max + 1` on budget.
    pub ball_sizes: Vec<usize>,
    /// Rows for `n = 1..`.
    pub rows: Vec<GrowthRow>,
    pub weak_poly_exponent: Option<f64>,
    pub slow_entropy: Option<SlowEntropyEstimate>,
    pub entropy_nondecreasing: bool,
    pub support_bound_holds: bool,
    pub truncated: bool,
}

/// Single pass over `mu^{*0..=n_max+1}` collecting the profile.
pub fn growth_profile(
    mu: &Measure,
    n_max: usize,
    scaling: DisplacementScaling,
    budget: usize,
) -> Result<GrowthProfile> {
    mu.check_admissible()?;
    let model = mu.model().clone();
    let e = model.identity();
    let (ball_sizes, ball_truncated) = match model.ball_sizes(n_max, budget) {
        Ok(s) => (s, false),
        Err(Error::BudgetExceeded { reached, .. }) => (model.ball_sizes(reached, budget)?, true),
        Err(err) => return Err(err),
    };

    let mut powers = Powers::new(
        mu,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    );
    let mut entropies = vec![0.0];
    let mut return_probs = vec![1.0];
    let mut displacements = vec![0.0];
    let mut support_ok = true;
    let mut truncated = ball_truncated;
    while powers.exponent() <= n_max {
        match powers.advance() {
            Ok(p) => {
                entropies.push(entropy(p));
                return_probs.push(p.mass_at(&e));
                support_ok &= support_bound(p).holds;
                if powers.exponent() <= n_max {
                    let n = powers.exponent();
                    displacements.push(scaling.factor(n) * max_generator_displacement(powers.current())?);
                }
            }
            Err(Error::BudgetExceeded { .. }) => {
                truncated = true;
                break;
            }
            Err(err) => return Err(err),
        }
    }
    let increments = increments_from(&entropies);
    let rows: Vec<GrowthRow> = increments
        .iter()
        .enumerate()
        .map(|(i, &a)| GrowthRow {
            n: i + 1,
            entropy: entropies[i + 1],
            increment: a,
            return_prob: return_probs[i + 1],
            ek_displacement: displacements[i + 1],
        })
        .collect();
    let inc = Increments {
        values: increments,
        truncated,
    };
    Ok(GrowthProfile {
        group: model.to_string(),
        n_max,
        scaling,
        weak_poly_exponent: weak_poly_exponent(&ball_sizes).ok(),
        ball_sizes,
        slow_entropy: slow_entropy_from(&inc).ok(),
        entropy_nondecreasing: entropies.windows(2).all(|w| w[1] >= w[0] - tol::INEQUALITY),
        support_bound_holds: support_ok,
        rows,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupModel, DEFAULT_BUDGET};

    fn lazy(model: &GroupModel) -> Measure {
        Measure::lazy(model, 0.5).unwrap()
    }

    #[test]
    fn weak_poly_closed_forms() {
        let z: Vec<usize> = (0..=100).map(|n| 2 * n + 1).collect();
        assert!((weak_poly_exponent(&z).unwrap() - 1.0).abs() < 0.1);
        let z2: Vec<usize> = (0..=100).map(|n| 2 * n * n + 2 * n + 1).collect();
        assert!((weak_poly_exponent(&z2).unwrap() - 2.0).abs() < 0.1);
        let f2: Vec<usize> = (0..=15).map(|n| 2 * 3usize.pow(n) - 1).collect();
        assert!(weak_poly_exponent(&f2).unwrap() > 5.0);
        assert!(matches!(
            weak_poly_exponent(&[1, 3, 5]),
            Err(Error::TooFewPoints { .. })
        ));
        // The raw ratio converges, but slowly.
        let raw = log_ratio_tail_min(&z).unwrap();
        assert!(raw > 1.0 && raw < 1.2);
    }

    #[test]
    fn dirac_walk_has_zero_increments() {
        // delta_e is not admissible, so go through the sequence directly.
        let model = GroupModel::Heisenberg;
        let seq = entropy_sequence(&Measure::identity(&model), 10, DEFAULT_BUDGET).unwrap();
        assert!(increments_from(&seq.entropies).iter().all(|&a| a == 0.0));
    }

    #[test]
    fn lazy_z_increments_near_half() {
        let inc = entropy_increments(&lazy(&GroupModel::FreeAbelian(1)), 200, DEFAULT_BUDGET).unwrap();
        assert!(!inc.truncated);
        for n in 50..=200 {
            let a = inc.get(n).unwrap();
            assert!((0.4..=0.6).contains(&a), "a_{n} = {a}");
        }
        assert!(inc.values.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn partial_sums_reproduce_entropy() {
        let seq = entropy_sequence(&lazy(&GroupModel::FreeAbelian(2)), 30, DEFAULT_BUDGET).unwrap();
        let h = &seq.entropies;
        let mut partial = 0.0;
        for k in 0..h.len() - 1 {
            partial += h[k + 1] - h[k];
            assert!((partial - h[k + 1]).abs() < 1e-9);
        }
    }

    #[test]
    fn free_group_increments_grow() {
        let mu = Measure::uniform_with_hold(&GroupModel::Free(2));
        let inc = entropy_increments(&mu, 11, DEFAULT_BUDGET).unwrap();
        for n in 8..=11 {
            assert!(inc.get(n).unwrap() >= 0.5);
            assert!(inc.get(n).unwrap() > inc.get(n - 1).unwrap());
        }
    }

    #[test]
    fn slow_entropy_on_z() {
        let est = slow_entropy_estimate(&lazy(&GroupModel::FreeAbelian(1)), 200, DEFAULT_BUDGET).unwrap();
        assert!((est.estimate - 0.5).abs() < 0.1);
        assert_eq!((est.n_from, est.n_to), (100, 200));
    }

    #[test]
    fn support_bound_examples() {
        let z = GroupModel::FreeAbelian(1);
        let b = support_bound(&Measure::identity(&z));
        assert_eq!((b.entropy, b.log_support, b.holds), (0.0, 0.0, true));
        let b = entropy_vs_log_support_check(&lazy(&z), 10, DEFAULT_BUDGET).unwrap();
        assert!((b.log_support - 21f64.ln()).abs() < 1e-15);
        assert!(b.holds);
        let f2 = Measure::uniform_with_hold(&GroupModel::Free(2));
        assert!(entropy_vs_log_support_check(&f2, 6, DEFAULT_BUDGET).unwrap().holds);
    }

    #[test]
    fn return_probability_examples() {
        let z = GroupModel::FreeAbelian(1);
        assert!(matches!(
            return_probability_checks(&lazy(&z), 1, DEFAULT_BUDGET),
            Err(Error::Precondition(_))
        ));
        let r = return_probability_checks(&lazy(&z), 50, DEFAULT_BUDGET).unwrap();
        assert!(r.holds);
        assert_eq!(r.checked.len(), 25);
        assert!(r.worst_peak_margin > 0.0 && r.worst_entropy_margin > 0.0);
        let ll = Measure::uniform_with_hold(&GroupModel::Lamplighter);
        let r = return_probability_checks(&ll, 20, DEFAULT_BUDGET).unwrap();
        assert!(r.holds && !r.truncated);
    }

    #[test]
    fn displacement_examples() {
        let z = GroupModel::FreeAbelian(1);
        let mu = lazy(&z);
        let values: Vec<f64> = [25, 50, 100]
            .iter()
            .map(|&n| ek_displacement(&mu, n, DisplacementScaling::RootN, DEFAULT_BUDGET).unwrap())
            .collect();
        for (&n, &v) in [25usize, 50, 100].iter().zip(&values) {
            assert!(v <= 2.0 * (n as f64).sqrt());
        }
        let spread = values.iter().cloned().fold(0.0, f64::max) / values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.1, "{values:?}");

        let f2 = Measure::uniform_with_hold(&GroupModel::Free(2));
        let d6 = ek_displacement(&f2, 6, DisplacementScaling::InverseRootN, DEFAULT_BUDGET).unwrap();
        let d10 = ek_displacement(&f2, 10, DisplacementScaling::InverseRootN, DEFAULT_BUDGET).unwrap();
        // n^{-1/2} scaling times sqrt(n) recovers the L1 distance, which stays away from 0.
        assert!(d6 * 6f64.sqrt() > 1.0 && d10 * 10f64.sqrt() > 1.0);
        let r6 = ek_displacement(&f2, 6, DisplacementScaling::RootN, DEFAULT_BUDGET).unwrap();
        let r10 = ek_displacement(&f2, 10, DisplacementScaling::RootN, DEFAULT_BUDGET).unwrap();
        assert!(r10 > r6);
    }

    #[test]
    fn displacement_chain_holds() {
        for model in [GroupModel::FreeAbelian(1), GroupModel::FreeAbelian(2), GroupModel::Heisenberg] {
            let mu = lazy(&model);
            for n in [1, 5, 12] {
                let c = ek_chain_check(&mu, n, DEFAULT_BUDGET).unwrap();
                assert!(c.holds, "{model} n={n}: {c:?}");
            }
        }
    }

    #[test]
    fn profile_on_z() {
        let p = growth_profile(&lazy(&GroupModel::FreeAbelian(1)), 40, DisplacementScaling::RootN, DEFAULT_BUDGET)
            .unwrap();
        assert_eq!(p.rows.len(), 40);
        assert_eq!(p.ball_sizes.len(), 41);
        assert!(p.entropy_nondecreasing && p.support_bound_holds && !p.truncated);
        assert!((p.weak_poly_exponent.unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn profile_truncates_on_budget() {
        let mu = Measure::uniform_with_hold(&GroupModel::Free(2));
        let p = growth_profile(&mu, 12, DisplacementScaling::RootN, 2000).unwrap();
        assert!(p.truncated);
        assert!(p.rows.len() < 12);
    }
}
