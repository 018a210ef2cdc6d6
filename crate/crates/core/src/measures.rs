//! Finitely supported measures on a group: convolution, entropy and the
//! concavity estimates that drive the entropy-growth argument.
//!
//! A [`Measure`] is any non-negative finitely supported function; most
//! operations additionally expect total mass one. Atoms are stored sorted by
//! packed key, and every sum runs in that order so results are bit-stable.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{Codec, GroupElement, GroupModel, DEFAULT_BUDGET};
use crate::tol;

#[derive(Clone, Debug)]
pub struct Measure {
    model: GroupModel,
    codec: Codec,
    atoms: Vec<(u64, f64)>,
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        self.model == other.model && self.atoms == other.atoms
    }
}

/// Serialized form: parallel arrays, elements in canonical string encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub elements: Vec<String>,
    pub weights: Vec<f64>,
}

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.carry
    }
}

fn out_of_range(what: &str, budget: usize, reached: usize) -> Error {
    Error::BudgetExceeded {
        what: what.to_string(),
        limit: budget,
        reached,
    }
}

impl Measure {
    fn from_keyed(model: GroupModel, codec: Codec, mut atoms: Vec<(u64, f64)>) -> Self {
        atoms.retain(|&(_, w)| w > 0.0);
        atoms.sort_unstable_by_key(|&(k, _)| k);
        Measure {
            model,
            codec,
            atoms,
        }
    }

    /// Builds a non-negative measure. Repeated elements are merged and zero
    /// weights dropped.
    pub fn from_atoms<I>(model: &GroupModel, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, f64)>,
    {
        let codec = Codec::new(model)?;
        let mut merged: FxHashMap<u64, f64> = FxHashMap::default();
        let mut order = Vec::new();
        for (g, w) in atoms {
            model.validate(&g)?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Precondition(format!("weight {w} at {g} is not a finite non-negative number")));
            }
            let key = codec
                .pack(&g)
                .ok_or_else(|| out_of_range("packed element range", 0, 0))?;
            let slot = merged.entry(key).or_insert_with(|| {
                order.push(key);
                0.0
            });
            *slot += w;
        }
        let atoms = order.into_iter().map(|k| (k, merged[&k])).collect();
        Ok(Self::from_keyed(model.clone(), codec, atoms))
    }

    /// Like [`Measure::from_atoms`] but requires total mass one.
    pub fn probability<I>(model: &GroupModel, atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, f64)>,
    {
        let m = Self::from_atoms(model, atoms)?;
        m.require_probability()?;
        Ok(m)
    }

    pub fn dirac(model: &GroupModel, g: GroupElement) -> Result<Self> {
        Self::from_atoms(model, [(g, 1.0)])
    }

    pub fn identity(model: &GroupModel) -> Self {
        Self::dirac(model, model.identity()).expect("identity always packs")
    }

    /// `mu(e) = alpha`, remaining mass uniform on the generators.
    pub fn lazy(model: &GroupModel, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::parse("measure", format!("hold probability {alpha} outside [0, 1]")));
        }
        let gens = model.generators();
        let w = (1.0 - alpha) / gens.len() as f64;
        let atoms = std::iter::once((model.identity(), alpha)).chain(gens.into_iter().map(|g| (g, w)));
        Self::from_atoms(model, atoms)
    }

    /// Uniform on `S ∪ {e}`.
    pub fn uniform_with_hold(model: &GroupModel) -> Self {
        let alpha = 1.0 / (model.generator_count() + 1) as f64;
        Self::lazy(model, alpha).expect("alpha in range")
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = Accumulator::default();
        for &(_, w) in &self.atoms {
            acc.add(w);
        }
        acc.value()
    }

    pub fn require_probability(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > tol::MASS {
            return Err(Error::Precondition(format!("total mass {mass} is not 1")));
        }
        Ok(())
    }

    pub fn mass_at(&self, g: &GroupElement) -> f64 {
        match self.codec.pack(g) {
            Some(k) => self.mass_at_key(k),
            None => 0.0,
        }
    }

    pub(crate) fn mass_at_key(&self, k: u64) -> f64 {
        self.atoms
            .binary_search_by_key(&k, |&(key, _)| key)
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub(crate) fn key_of(&self, g: &GroupElement) -> Result<u64> {
        self.model.validate(g)?;
        self.codec
            .pack(g)
            .ok_or_else(|| out_of_range("packed element range", 0, 0))
    }

    /// Atoms in canonical (packed-key) order.
    pub fn iter(&self) -> impl Iterator<Item = (GroupElement, f64)> + '_ {
        self.atoms.iter().map(|&(k, w)| (self.codec.unpack(k), w))
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.iter().map(|(g, _)| g).collect()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.mass_at(g) > 0.0
    }

    fn same_model(&self, other: &Measure) -> Result<()> {
        if self.model != other.model {
            return Err(Error::ModelMismatch {
                left: self.model.to_string(),
                right: other.model.to_string(),
            });
        }
        Ok(())
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &Measure) -> Result<Measure> {
        self.same_model(other)?;
        let mut atoms = Vec::with_capacity(self.len() + other.len());
        merge_join(&self.atoms, &other.atoms, |k, a, b| atoms.push((k, a + b)));
        Ok(Measure {
            model: self.model.clone(),
            codec: self.codec.clone(),
            atoms,
        })
    }

    pub fn scale(&self, factor: f64) -> Measure {
        let atoms = self.atoms.iter().map(|&(k, w)| (k, w * factor)).collect();
        Self::from_keyed(self.model.clone(), self.codec.clone(), atoms)
    }

    /// `mu(x) = mu(x^-1)` for every atom, within the mass tolerance.
    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(g, w)| {
            let inv = self.model.inverse(&g).expect("atoms are valid elements");
            (self.mass_at(&inv) - w).abs() <= tol::MASS
        })
    }

    /// Symmetric probability measure with `mu(e) > 0` whose support generates.
    ///
    /// Generation is accepted when `supp mu ∪ {e}` contains the generating
    /// list, or when every generator is a product of at most four support
    /// elements.
    pub fn check_admissible(&self) -> Result<()> {
        self.require_probability()
            .map_err(|e| Error::NotAdmissible(e.to_string()))?;
        if !self.is_symmetric() {
            return Err(Error::NotAdmissible("measure is not symmetric".into()));
        }
        if self.mass_at(&self.model.identity()) <= 0.0 {
            return Err(Error::NotAdmissible("mu(e) must be positive".into()));
        }
        let gens: Vec<u64> = self
            .model
            .generators()
            .iter()
            .map(|g| self.codec.pack(g).expect("generators pack"))
            .collect();
        if gens.iter().all(|&k| self.mass_at_key(k) > 0.0) {
            return Ok(());
        }
        let mut reach: Vec<u64> = self.atoms.iter().map(|&(k, _)| k).collect();
        let base = reach.clone();
        for _ in 1..4 {
            let mut next = reach.clone();
            for &a in &reach {
                for &b in &base {
                    if let Some(c) = self.codec.mul(a, b) {
                        next.push(c);
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            reach = next;
        }
        if gens.iter().all(|k| reach.binary_search(k).is_ok()) {
            Ok(())
        } else {
            Err(Error::NotAdmissible("support does not generate the group".into()))
        }
    }

    pub fn to_json(&self) -> MeasureJson {
        let (elements, weights) = self.iter().map(|(g, w)| (g.to_string(), w)).unzip();
        MeasureJson { elements, weights }
    }

    pub fn from_json(model: &GroupModel, json: &MeasureJson) -> Result<Self> {
        if json.elements.len() != json.weights.len() {
            return Err(Error::parse("measure", "elements and weights differ in length"));
        }
        let atoms = json
            .elements
            .iter()
            .zip(&json.weights)
            .map(|(s, &w)| Ok((model.parse_element(s)?, w)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(model, atoms)
    }
}

/// Walks the union of two sorted supports, calling `f(key, p(key), q(key))`.
pub(crate) fn merge_join(p: &[(u64, f64)], q: &[(u64, f64)], mut f: impl FnMut(u64, f64, f64)) {
    let (mut i, mut j) = (0, 0);
    while i < p.len() || j < q.len() {
        let kp = p.get(i).map(|a| a.0).unwrap_or(u64::MAX);
        let kq = q.get(j).map(|a| a.0).unwrap_or(u64::MAX);
        if j >= q.len() || (i < p.len() && kp < kq) {
            f(kp, p[i].1, 0.0);
            i += 1;
        } else if i >= p.len() || kq < kp {
            f(kq, 0.0, q[j].1);
            j += 1;
        } else {
            f(kp, p[i].1, q[j].1);
            i += 1;
            j += 1;
        }
    }
}

/// `mu * nu = sum_g mu(g) (g nu)` with the default budget.
pub fn convolve(mu: &Measure, nu: &Measure) -> Result<Measure> {
    convolve_with_budget(mu, nu, DEFAULT_BUDGET)
}

pub fn convolve_with_budget(mu: &Measure, nu: &Measure, budget: usize) -> Result<Measure> {
    mu.same_model(nu)?;
    let codec = &mu.codec;
    let overflow = || out_of_range("convolution support", budget, 0);
    let mut acc: FxHashMap<u64, f64> = FxHashMap::default();
    acc.reserve(nu.len().saturating_mul(2).min(budget));
    for &(a, wa) in &mu.atoms {
        for &(b, wb) in &nu.atoms {
            let key = codec.mul(a, b).ok_or_else(overflow)?;
            *acc.entry(key).or_insert(0.0) += wa * wb;
        }
        if acc.len() > budget {
            return Err(overflow());
        }
    }
    Ok(Measure::from_keyed(
        mu.model.clone(),
        codec.clone(),
        acc.into_iter().collect(),
    ))
}

/// Options for [`convolution_power_with`].
#[derive(Clone, Copy, Debug)]
pub struct PowerOptions {
    /// Atoms lighter than this are dropped after every step.
    pub prune_eps: Option<f64>,
    /// Rescale to mass one after pruning.
    pub renormalize: bool,
    pub budget: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            prune_eps: None,
            renormalize: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PowerResult {
    pub measure: Measure,
    /// Total mass removed by pruning (zero when pruning is off).
    pub dropped_mass: f64,
}

impl PowerResult {
    /// Bound on `|H(exact) - H(pruned)|`: `eps log|supp| + h(eps)` for
    /// dropped mass `eps`, with `h` the binary entropy.
    pub fn entropy_error_bound(&self) -> f64 {
        let eps = self.dropped_mass;
        if eps <= 0.0 {
            return 0.0;
        }
        let binary = -eps * eps.ln() - if eps < 1.0 { (1.0 - eps) * (1.0 - eps).ln() } else { 0.0 };
        eps * (self.measure.len().max(1) as f64).ln() + binary
    }
}

/// `mu^{*n}`; `n = 0` gives the Dirac mass at the identity.
pub fn convolution_power(mu: &Measure, n: usize) -> Result<Measure> {
    Ok(convolution_power_with(mu, n, PowerOptions::default())?.measure)
}

pub fn convolution_power_with(mu: &Measure, n: usize, opts: PowerOptions) -> Result<PowerResult> {
    let mut powers = Powers::new(mu, opts);
    for _ in 0..n {
        powers.advance()?;
    }
    Ok(PowerResult {
        measure: powers.current().clone(),
        dropped_mass: powers.dropped_mass(),
    })
}

/// Successive convolution powers `mu^{*0}, mu^{*1}, ...`, computed as
/// `mu * mu^{*k}` so only the current power is held in memory.
pub struct Powers {
    mu: Measure,
    current: Measure,
    exponent: usize,
    dropped: f64,
    opts: PowerOptions,
}

impl Powers {
    pub fn new(mu: &Measure, opts: PowerOptions) -> Self {
        Powers {
            current: Measure::identity(&mu.model),
            mu: mu.clone(),
            exponent: 0,
            dropped: 0.0,
            opts,
        }
    }

    pub fn exponent(&self) -> usize {
        self.exponent
    }

    pub fn current(&self) -> &Measure {
        &self.current
    }

    pub fn dropped_mass(&self) -> f64 {
        self.dropped
    }

    /// Steps to the next power. On budget failure `reached` is the largest
    /// exponent that was computed.
    pub fn advance(&mut self) -> Result<&Measure> {
        let next = convolve_with_budget(&self.mu, &self.current, self.opts.budget).map_err(|e| match e {
            Error::BudgetExceeded { limit, .. } => Error::BudgetExceeded {
                what: format!("convolution power of a measure on {}", self.mu.model),
                limit,
                reached: self.exponent,
            },
            other => other,
        })?;
        let mut next = next;
        if let Some(eps) = self.opts.prune_eps.filter(|&e| e > 0.0) {
            let mut dropped = Accumulator::default();
            next.atoms.retain(|&(_, w)| {
                if w < eps {
                    dropped.add(w);
                    false
                } else {
                    true
                }
            });
            self.dropped += dropped.value();
            if self.opts.renormalize {
                let mass = next.total_mass();
                if mass > 0.0 {
                    next = next.scale(1.0 / mass);
                }
            }
        }
        self.current = next;
        self.exponent += 1;
        Ok(&self.current)
    }
}

/// Left translate `(g nu)(x) = nu(g^-1 x)`.
pub fn translate(g: &GroupElement, mu: &Measure) -> Result<Measure> {
    let kg = mu.key_of(g)?;
    let atoms = mu
        .atoms
        .iter()
        .map(|&(k, w)| {
            mu.codec
                .mul(kg, k)
                .map(|key| (key, w))
                .ok_or_else(|| out_of_range("packed element range", 0, 0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Measure::from_keyed(mu.model.clone(), mu.codec.clone(), atoms))
}

/// Shannon entropy in nats, `0 log 0 = 0`.
pub fn entropy(p: &Measure) -> f64 {
    let mut acc = Accumulator::default();
    for &(_, w) in &p.atoms {
        acc.add(-w * w.ln());
    }
    acc.value()
}

pub fn l1_distance(p: &Measure, q: &Measure) -> Result<f64> {
    p.same_model(q)?;
    let mut acc = Accumulator::default();
    merge_join(&p.atoms, &q.atoms, |_, a, b| acc.add((a - b).abs()));
    Ok(acc.value())
}

/// `(1+t) ln(1+t) + (1-t) ln(1-t)` for `|t| <= 1`, accurate near zero.
fn symmetric_xlogx(t: f64) -> f64 {
    let t = t.abs();
    if t < 0.1 {
        // sum_k t^{2k} / (k (2k - 1))
        let t2 = t * t;
        let mut term = t2;
        let mut sum = 0.0;
        for k in 1..=12 {
            let kf = k as f64;
            sum += term / (kf * (2.0 * kf - 1.0));
            term *= t2;
        }
        sum
    } else if t >= 1.0 {
        2.0 * std::f64::consts::LN_2
    } else {
        (1.0 + t) * t.ln_1p() + (1.0 - t) * (-t).ln_1p()
    }
}

/// The pointwise concavity gap and its quadratic lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityGap {
    /// `(a log a + b log b)/2 - ((a+b)/2) log((a+b)/2)`
    pub gap: f64,
    /// `|a - b|^2 / (8 (a + b))`
    pub bound: f64,
}

pub fn pointwise_concavity_gap(a: f64, b: f64) -> ConcavityGap {
    let s = a + b;
    if s <= 0.0 {
        return ConcavityGap { gap: 0.0, bound: 0.0 };
    }
    let t = (a - b) / s;
    ConcavityGap {
        gap: 0.25 * s * symmetric_xlogx(t),
        bound: (a - b) * (a - b) / (8.0 * s),
    }
}

/// `delta(p, q) = H((p+q)/2) - (H(p) + H(q))/2`, summed pointwise.
pub fn delta_concavity(p: &Measure, q: &Measure) -> Result<f64> {
    p.same_model(q)?;
    let mut acc = Accumulator::default();
    merge_join(&p.atoms, &q.atoms, |_, a, b| acc.add(pointwise_concavity_gap(a, b).gap));
    Ok(acc.value())
}

/// `sum_x |p - q|^2 / (8 (p + q))`.
pub fn concavity_lower_bound(p: &Measure, q: &Measure) -> Result<f64> {
    p.same_model(q)?;
    let mut acc = Accumulator::default();
    merge_join(&p.atoms, &q.atoms, |_, a, b| acc.add(pointwise_concavity_gap(a, b).bound));
    Ok(acc.value())
}

/// Both sides of a checked inequality. `margin` is positive when the
/// inequality holds strictly, whichever direction it runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl InequalityReport {
    pub fn at_most(lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        InequalityReport {
            lhs,
            rhs,
            margin,
            holds: margin >= -tol::INEQUALITY,
        }
    }

    pub fn at_least(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        InequalityReport {
            lhs,
            rhs,
            margin,
            holds: margin >= -tol::INEQUALITY,
        }
    }
}

/// `sum f |p - q| <= (8 delta(p,q) sum f^2 (p + q))^{1/2}` for non-negative `f`.
pub fn check_eq1<F>(f: F, p: &Measure, q: &Measure) -> Result<InequalityReport>
where
    F: Fn(&GroupElement) -> f64,
{
    p.same_model(q)?;
    let codec = &p.codec;
    let mut lhs = Accumulator::default();
    let mut weighted = Accumulator::default();
    let mut delta = Accumulator::default();
    let mut bad = None;
    merge_join(&p.atoms, &q.atoms, |k, a, b| {
        let fx = f(&codec.unpack(k));
        if !(fx >= 0.0 && fx.is_finite()) {
            bad = Some(fx);
        }
        lhs.add(fx * (a - b).abs());
        weighted.add(fx * fx * (a + b));
        delta.add(pointwise_concavity_gap(a, b).gap);
    });
    if let Some(v) = bad {
        return Err(Error::Precondition(format!("f must be finite and non-negative, got {v}")));
    }
    let rhs = (8.0 * delta.value().max(0.0) * weighted.value()).sqrt();
    Ok(InequalityReport::at_most(lhs.value(), rhs))
}

/// `H(mu * nu) - H(nu) >= 2 min{mu(e), mu(g0)} delta(nu, g0 nu)`.
pub fn check_eq2(mu: &Measure, nu: &Measure, g0: &GroupElement) -> Result<InequalityReport> {
    check_eq2_with_budget(mu, nu, g0, DEFAULT_BUDGET)
}

pub fn check_eq2_with_budget(
    mu: &Measure,
    nu: &Measure,
    g0: &GroupElement,
    budget: usize,
) -> Result<InequalityReport> {
    mu.same_model(nu)?;
    mu.require_probability()?;
    nu.require_probability()?;
    if !mu.contains(g0) {
        return Err(Error::Precondition(format!("g0 = {g0} is not in the support of mu")));
    }
    let lambda = mu.mass_at(&mu.model.identity()).min(mu.mass_at(g0));
    let lhs = entropy(&convolve_with_budget(mu, nu, budget)?) - entropy(nu);
    let rhs = 2.0 * lambda * delta_concavity(nu, &translate(g0, nu)?)?;
    Ok(InequalityReport::at_least(lhs, rhs))
}
