//! 1-cocycles `b(gx) = b(g) + pi_g b(x)` with finite-dimensional unitary
//! coefficients, stored by their values on the generators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel, Word};
use crate::linalg::{self, CMatrix, CVector, HermitianEigen, C64};
use crate::measures::{self, delta_concavity, entropy, translate, Measure, PowerOptions, Powers};
use crate::repr::{self, markov_operator, tensor_markov_operator, RepSource, Spectral, UnitaryRep};
use crate::tol;

/// The affine map `v -> pi_g v + b(g)`; composition matches the group law.
#[derive(Clone, Debug)]
struct Affine {
    m: CMatrix,
    v: CVector,
}

impl Affine {
    fn identity(d: usize) -> Self {
        Affine {
            m: CMatrix::identity(d, d),
            v: CVector::zeros(d),
        }
    }

    /// The map of `g1 g2` from those of `g1` and `g2`.
    fn then(&self, other: &Affine) -> Affine {
        Affine {
            m: &self.m * &other.m,
            v: &self.v + &self.m * &other.v,
        }
    }

    fn pow(&self, mut e: usize) -> Affine {
        let mut result = Affine::identity(self.v.len());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.then(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.then(&base);
            }
        }
        result
    }
}

#[derive(Clone, Debug)]
pub struct Cocycle {
    rep: UnitaryRep,
    /// Affine map of every generator (inverses included).
    generators: Vec<Affine>,
}

fn vector_scale(vs: &[CVector]) -> f64 {
    vs.iter().map(linalg::norm).fold(1.0, f64::max)
}

impl Cocycle {
    /// `primal[j]` is `b` on generator `model.primal_generators()[j]`; values
    /// on inverse generators follow from `b(s^-1) = -pi_{s^-1} b(s)`.
    pub fn new(rep: &UnitaryRep, primal: Vec<CVector>) -> Result<Self> {
        let model = rep.model();
        let indices = model.primal_generators();
        if primal.len() != indices.len() {
            return Err(Error::Precondition(format!(
                "{model} needs {} cocycle values, got {}",
                indices.len(),
                primal.len()
            )));
        }
        if let Some(v) = primal.iter().find(|v| v.len() != rep.dim()) {
            return Err(Error::Precondition(format!(
                "cocycle value of length {} for a {}-dimensional representation",
                v.len(),
                rep.dim()
            )));
        }
        let scale = vector_scale(&primal);
        let mut generators = vec![Affine::identity(rep.dim()); model.generator_count()];
        for (&i, v) in indices.iter().zip(primal) {
            let inv = model.inverse_generator(i);
            generators[inv] = Affine {
                m: rep.generator(inv).clone(),
                v: -(rep.generator(inv) * &v),
            };
            generators[i] = Affine {
                m: rep.generator(i).clone(),
                v,
            };
        }
        let b = Cocycle {
            rep: rep.clone(),
            generators,
        };
        for r in model.relators()? {
            let residual = linalg::norm(&b.evaluate_word(&r));
            if residual > tol::COCYCLE * scale {
                return Err(Error::RelatorViolation {
                    relator: model.format_word(&r),
                    residual,
                });
            }
        }
        Ok(b)
    }

    pub fn zero(rep: &UnitaryRep) -> Self {
        let k = rep.model().primal_generators().len();
        Self::new(rep, vec![CVector::zeros(rep.dim()); k]).expect("zero cocycle is consistent")
    }

    /// `b(g) = xi - pi_g xi`.
    pub fn coboundary(rep: &UnitaryRep, xi: &CVector) -> Result<Self> {
        if xi.len() != rep.dim() {
            return Err(Error::Precondition(format!(
                "vector of length {} for a {}-dimensional representation",
                xi.len(),
                rep.dim()
            )));
        }
        let values = rep
            .model()
            .primal_generators()
            .into_iter()
            .map(|i| xi - rep.generator(i) * xi)
            .collect();
        Self::new(rep, values)
    }

    pub fn rep(&self) -> &UnitaryRep {
        &self.rep
    }

    pub fn model(&self) -> &GroupModel {
        self.rep.model()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Values on the primal generators.
    pub fn primal_values(&self) -> Vec<CVector> {
        self.model()
            .primal_generators()
            .into_iter()
            .map(|i| self.generators[i].v.clone())
            .collect()
    }

    /// `b` on generator `i` (any index).
    pub fn generator_value(&self, i: usize) -> &CVector {
        &self.generators[i].v
    }

    fn word_affine(&self, w: &Word) -> Affine {
        let mut acc = Affine::identity(self.dim());
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let mut j = i;
            while j < letters.len() && letters[j] == letters[i] {
                j += 1;
            }
            acc = acc.then(&self.generators[letters[i]].pow(j - i));
            i = j;
        }
        acc
    }

    fn signed_power(&self, letter: usize, e: i64) -> Affine {
        let l = if e >= 0 {
            letter
        } else {
            self.model().inverse_generator(letter)
        };
        self.generators[l].pow(e.unsigned_abs() as usize)
    }

    fn element_affine(&self, g: &GroupElement) -> Result<Affine> {
        match (self.model(), g) {
            (GroupModel::Heisenberg, &GroupElement::Heisenberg(a, b, c)) => {
                // x^a y^b z^{c - ab} with z = [x, y].
                let z = self.word_affine(&Word(vec![0, 2, 1, 3]));
                let k = c - a * b;
                let zk = if k >= 0 {
                    z.pow(k as usize)
                } else {
                    self.word_affine(&Word(vec![2, 0, 3, 1])).pow(k.unsigned_abs() as usize)
                };
                Ok(self.signed_power(0, a).then(&self.signed_power(2, b)).then(&zk))
            }
            (model, _) => Ok(self.word_affine(&model.express(g)?)),
        }
    }

    pub fn evaluate_word(&self, w: &Word) -> CVector {
        self.word_affine(w).v
    }

    pub fn evaluate(&self, g: &GroupElement) -> Result<CVector> {
        Ok(self.element_affine(g)?.v)
    }

    /// Evaluates along two different words for `g` and requires agreement.
    pub fn evaluate_checked(&self, g: &GroupElement) -> Result<CVector> {
        let v = self.evaluate(g)?;
        let w = self.evaluate_word(&self.model().alternative_word(g)?);
        let diff = linalg::norm(&(&v - &w));
        if diff > tol::COCYCLE * linalg::norm(&v).max(1.0) {
            return Err(Error::Consistency {
                what: format!("cocycle value at {g} along two words"),
                left: linalg::norm(&v),
                right: linalg::norm(&w),
            });
        }
        Ok(v)
    }

    fn same_rep(&self, other: &Cocycle) -> Result<()> {
        let same = self.model() == other.model()
            && self.dim() == other.dim()
            && (0..self.model().generator_count())
                .all(|i| linalg::max_abs_diff(self.rep.generator(i), other.rep.generator(i)) <= tol::UNITARY);
        if !same {
            return Err(Error::ModelMismatch {
                left: format!("{} ({}-dim)", self.model(), self.dim()),
                right: format!("{} ({}-dim)", other.model(), other.dim()),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Cocycle) -> Result<Cocycle> {
        self.same_rep(other)?;
        let values = self
            .primal_values()
            .iter()
            .zip(other.primal_values())
            .map(|(a, b)| a + b)
            .collect();
        Cocycle::new(&self.rep, values)
    }

    pub fn scale(&self, z: C64) -> Cocycle {
        let values = self.primal_values().iter().map(|v| v * z).collect();
        Cocycle::new(&self.rep, values).expect("scaling preserves consistency")
    }

    pub fn sub(&self, other: &Cocycle) -> Result<Cocycle> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn to_json(&self) -> CocycleJson {
        let model = self.model();
        CocycleJson {
            rep: RepSource::Explicit(self.rep.to_json()),
            values: model
                .primal_generators()
                .into_iter()
                .map(|i| (model.generator_label(i), repr::vector_to_json(&self.generators[i].v)))
                .collect(),
        }
    }

    pub fn from_json(model: &GroupModel, json: &CocycleJson) -> Result<Self> {
        let rep = json.rep.resolve(model)?;
        for label in json.values.keys() {
            match model.generator_index(label) {
                Some(i) if model.primal_generators().contains(&i) => {}
                _ => {
                    return Err(Error::parse(
                        "cocycle.values",
                        format!("{label:?} is not a generator label of {model}"),
                    ))
                }
            }
        }
        let mut values = Vec::new();
        for i in model.primal_generators() {
            let label = model.generator_label(i);
            let v = json
                .values
                .get(&label)
                .ok_or_else(|| Error::parse("cocycle.values", format!("missing generator {label:?}")))?;
            values.push(repr::vector_from_json(v));
        }
        Cocycle::new(&rep, values)
    }
}

/// Serialized cocycle: a representation and one `[re, im]` vector per primal generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleJson {
    pub rep: RepSource,
    pub values: BTreeMap<String, Vec<[f64; 2]>>,
}

fn require_same_model(b: &Cocycle, mu: &Measure) -> Result<()> {
    if b.model() != mu.model() {
        return Err(Error::ModelMismatch {
            left: b.model().to_string(),
            right: mu.model().to_string(),
        });
    }
    Ok(())
}

/// `sum_x mu(x) b(x)`.
pub fn mean(b: &Cocycle, mu: &Measure) -> Result<CVector> {
    require_same_model(b, mu)?;
    let mut v = CVector::zeros(b.dim());
    for (x, w) in mu.iter() {
        v += b.evaluate(&x)? * C64::new(w, 0.0);
    }
    Ok(v)
}

/// `<b, c>_{Z^1} = sum_x mu(x) <b(x), c(x)>`.
pub fn z1_inner(b: &Cocycle, c: &Cocycle, mu: &Measure) -> Result<C64> {
    b.same_rep(c)?;
    require_same_model(b, mu)?;
    let mut s = C64::new(0.0, 0.0);
    for (x, w) in mu.iter() {
        s += linalg::inner(&b.evaluate(&x)?, &c.evaluate(&x)?) * w;
    }
    Ok(s)
}

pub fn z1_norm(b: &Cocycle, mu: &Measure) -> Result<f64> {
    Ok(z1_inner(b, b, mu)?.re.max(0.0).sqrt())
}

/// `|sum_x mu(x) b(x)|`.
pub fn harmonicity_defect(b: &Cocycle, mu: &Measure) -> Result<f64> {
    Ok(linalg::norm(&mean(b, mu)?))
}

fn require_harmonic(b: &Cocycle, mu: &Measure) -> Result<()> {
    let defect = harmonicity_defect(b, mu)?;
    let scale = vector_scale(&b.primal_values());
    if defect > tol::COCYCLE * scale {
        return Err(Error::Precondition(format!(
            "cocycle is not harmonic (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Both sides of `sum_x mu(x) <b(x), xi - pi_x xi> = 2 <sum_x mu(x) b(x), xi>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub residual: f64,
    pub holds: bool,
}

pub fn orthogonality_identity(b: &Cocycle, mu: &Measure, xi: &CVector) -> Result<OrthogonalityReport> {
    mu.require_probability()?;
    if !mu.is_symmetric() {
        return Err(Error::NotAdmissible("measure is not symmetric".into()));
    }
    let coboundary = Cocycle::coboundary(b.rep(), xi)?;
    let lhs = z1_inner(b, &coboundary, mu)?;
    let rhs = linalg::inner(&mean(b, mu)?, xi) * 2.0;
    let residual = (lhs - rhs).norm();
    let scale = vector_scale(&b.primal_values()) * linalg::norm(xi).max(1.0);
    Ok(OrthogonalityReport {
        lhs: [lhs.re, lhs.im],
        rhs: [rhs.re, rhs.im],
        residual,
        holds: residual <= tol::COCYCLE * scale,
    })
}

/// Solves `(I - T) xi = v` on the orthogonal complement of the eigenvalue-1
/// eigenspace of the Hermitian `T`.
fn solve_off_kernel(t: &CMatrix, v: &CVector) -> Result<CVector> {
    let eig = HermitianEigen::new(t)?;
    let mut xi = CVector::zeros(v.len());
    for (i, &lambda) in eig.values.iter().enumerate() {
        let gap = 1.0 - lambda;
        if gap.abs() <= tol::EIGEN_CLUSTER {
            continue;
        }
        let q = eig.vector(i);
        xi += &q * (linalg::inner(v, &q) / gap);
    }
    Ok(xi)
}

/// Result of projecting a cocycle onto the harmonic cocycles along the
/// coboundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub group: String,
    /// `b - d(xi)`.
    pub harmonic: CocycleJson,
    /// Minimizer of `|b - d(xi)|_{Z^1}` orthogonal to the invariant vectors.
    pub xi: Vec<[f64; 2]>,
    pub defect_before: f64,
    pub defect_after: f64,
    pub norm_before: f64,
    pub norm_after: f64,
    /// Whether the harmonic part vanishes, i.e. `b` lies in the closure of the coboundaries.
    pub harmonic_part_zero: bool,
}

#[derive(Clone, Debug)]
pub struct HarmonicProjection {
    pub harmonic: Cocycle,
    pub xi: CVector,
    pub report: HarmonicReport,
}

pub fn harmonic_projection(b: &Cocycle, mu: &Measure) -> Result<HarmonicProjection> {
    require_same_model(b, mu)?;
    let t = markov_operator(b.rep(), mu)?;
    let v = mean(b, mu)?;
    let xi = solve_off_kernel(&t, &v)?;
    let harmonic = b.sub(&Cocycle::coboundary(b.rep(), &xi)?)?;
    let defect_before = linalg::norm(&v);
    let defect_after = harmonicity_defect(&harmonic, mu)?;
    let norm_before = z1_norm(b, mu)?;
    let norm_after = z1_norm(&harmonic, mu)?;
    let scale = vector_scale(&b.primal_values());
    if defect_after > tol::COCYCLE * scale {
        return Err(Error::Consistency {
            what: "harmonicity after projection".into(),
            left: defect_after,
            right: tol::COCYCLE,
        });
    }
    let report = HarmonicReport {
        group: b.model().to_string(),
        harmonic: harmonic.to_json(),
        xi: repr::vector_to_json(&xi),
        defect_before,
        defect_after,
        norm_before,
        norm_after,
        harmonic_part_zero: norm_after <= tol::COCYCLE * scale,
    };
    Ok(HarmonicProjection { harmonic, xi, report })
}

/// Coefficient blocks of `b(w)` as a linear function of the primal values:
/// `b(w) = sum_j blocks[j] b(s_j)`.
fn word_coefficients(rep: &UnitaryRep, w: &Word) -> Vec<CMatrix> {
    let model = rep.model();
    let primal = model.primal_generators();
    let d = rep.dim();
    let mut blocks = vec![CMatrix::zeros(d, d); primal.len()];
    let mut prefix = CMatrix::identity(d, d);
    for &s in w.letters() {
        let inv = model.inverse_generator(s);
        if let Some(j) = primal.iter().position(|&p| p == s) {
            blocks[j] += &prefix;
        } else {
            // b(s) = -pi_s b(s^-1) with s^-1 primal.
            let j = primal.iter().position(|&p| p == inv).expect("inverse of a non-primal letter is primal");
            blocks[j] -= &prefix * rep.generator(s);
        }
        prefix *= rep.generator(s);
    }
    blocks
}

/// Stacked linear constraints on the primal values: every relator and,
/// when `mu` is given, harmonicity.
fn constraint_matrix(rep: &UnitaryRep, mu: Option<&Measure>) -> Result<CMatrix> {
    let model = rep.model();
    let d = rep.dim();
    let k = model.primal_generators().len();
    let mut rows: Vec<Vec<CMatrix>> = Vec::new();
    for r in model.relators()? {
        rows.push(word_coefficients(rep, &r));
    }
    if let Some(mu) = mu {
        if mu.model() != model {
            return Err(Error::ModelMismatch {
                left: model.to_string(),
                right: mu.model().to_string(),
            });
        }
        let mut acc = vec![CMatrix::zeros(d, d); k];
        for (x, w) in mu.iter() {
            for (a, blk) in acc.iter_mut().zip(word_coefficients(rep, &model.express(&x)?)) {
                *a += blk * C64::new(w, 0.0);
            }
        }
        rows.push(acc);
    }
    let mut m = CMatrix::zeros(rows.len() * d, k * d);
    for (r, blocks) in rows.iter().enumerate() {
        for (j, blk) in blocks.iter().enumerate() {
            m.view_mut((r * d, j * d), (d, d)).copy_from(blk);
        }
    }
    Ok(m)
}

/// Orthonormal basis of the null space of `m` (via the Gram matrix).
fn null_space(m: &CMatrix) -> Result<Vec<CVector>> {
    let gram = m.adjoint() * m;
    let eig = HermitianEigen::new(&gram)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(1.0);
    Ok(eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= tol::RANK * top)
        .map(|(i, _)| eig.vector(i))
        .collect())
}

fn basis_cocycles(rep: &UnitaryRep, basis: Vec<CVector>) -> Result<Vec<Cocycle>> {
    let d = rep.dim();
    let k = rep.model().primal_generators().len();
    basis
        .into_iter()
        .map(|v| Cocycle::new(rep, (0..k).map(|j| v.rows(j * d, d).into_owned()).collect()))
        .collect()
}

/// Basis of all cocycles (relator-consistent generator values).
pub fn cocycle_space_basis(rep: &UnitaryRep) -> Result<Vec<Cocycle>> {
    let m = constraint_matrix(rep, None)?;
    let basis = if m.nrows() == 0 {
        let n = m.ncols();
        (0..n).map(|i| CVector::from_fn(n, |r, _| C64::new((r == i) as u8 as f64, 0.0))).collect()
    } else {
        null_space(&m)?
    };
    basis_cocycles(rep, basis)
}

/// Basis of the `mu`-harmonic cocycles.
pub fn harmonic_space_basis(rep: &UnitaryRep, mu: &Measure) -> Result<Vec<Cocycle>> {
    mu.check_admissible()?;
    basis_cocycles(rep, null_space(&constraint_matrix(rep, Some(mu))?)?)
}

/// Complex dimension of the `mu`-harmonic cocycles, which is the dimension
/// of the reduced first cohomology.
pub fn harmonic_space_dimension(model: &GroupModel, rep: &UnitaryRep, mu: &Measure) -> Result<usize> {
    if rep.model() != model {
        return Err(Error::ModelMismatch {
            left: model.to_string(),
            right: rep.model().to_string(),
        });
    }
    Ok(harmonic_space_basis(rep, mu)?.len())
}


/// Runs `f(n, mu^{*n})` for each requested exponent, ascending.
fn over_powers<T>(
    mu: &Measure,
    ns: &[usize],
    budget: usize,
    mut f: impl FnMut(usize, &Measure) -> Result<T>,
) -> Result<Vec<T>> {
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut powers = Powers::new(
        mu,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    );
    let mut out = Vec::with_capacity(sorted.len());
    for n in sorted {
        while powers.exponent() < n {
            powers.advance()?;
        }
        out.push(f(n, powers.current())?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub n: usize,
    /// `sum_x mu^{*n}(x) |b(x)|^2`
    pub lhs: f64,
    /// `n sum_x mu(x) |b(x)|^2`
    pub rhs: f64,
    pub holds: bool,
}

/// `sum_x mu^{*n}(x) |b(x)|^2 = n sum_x mu(x) |b(x)|^2` for harmonic `b`.
pub fn energy_identity_check(b: &Cocycle, mu: &Measure, n: usize, budget: usize) -> Result<EnergyReport> {
    Ok(energy_identity_profile(b, mu, &[n], budget)?[0])
}

pub fn energy_identity_profile(b: &Cocycle, mu: &Measure, ns: &[usize], budget: usize) -> Result<Vec<EnergyReport>> {
    require_same_model(b, mu)?;
    mu.check_admissible()?;
    require_harmonic(b, mu)?;
    let energy = z1_norm(b, mu)?.powi(2);
    over_powers(mu, ns, budget, |n, p| {
        let mut acc = measures::Accumulator::default();
        for (x, w) in p.iter() {
            acc.add(w * linalg::norm(&b.evaluate(&x)?).powi(2));
        }
        let lhs = acc.value();
        let rhs = n as f64 * energy;
        Ok(EnergyReport {
            n,
            lhs,
            rhs,
            holds: (lhs - rhs).abs() <= 1e-8 * rhs.max(1.0),
        })
    })
}

/// `b (x) conj(b)` with basis index `(j, k) -> j d + k`.
fn tensor_square(v: &CVector) -> CVector {
    let d = v.len();
    CVector::from_fn(d * d, |r, _| v[r / d] * v[r % d].conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    /// `(1/n) |sum_x mu^{*n}(x) b(x) (x) conj(b(x))|` by exact convolution.
    pub direct: f64,
    /// `(1/n) |(1 + T + ... + T^{n-1}) zeta|` from the spectral measure.
    pub spectral: f64,
    /// `sqrt(m({1}))`.
    pub limit: f64,
}

/// `zeta = sum_x mu(x) b(x) (x) conj(b(x))` and `T = sum_x mu(x) pi_x (x) conj(pi_x)`.
pub fn lemma_operator(b: &Cocycle, mu: &Measure) -> Result<Spectral> {
    require_same_model(b, mu)?;
    let t = tensor_markov_operator(b.rep(), mu)?;
    let mut zeta = CVector::zeros(b.dim() * b.dim());
    for (x, w) in mu.iter() {
        zeta += tensor_square(&b.evaluate(&x)?) * C64::new(w, 0.0);
    }
    Spectral::new(&t, &zeta)
}

pub fn lemma_quantity(b: &Cocycle, mu: &Measure, n: usize, budget: usize) -> Result<LemmaReport> {
    Ok(lemma_profile(b, mu, &[n], budget)?[0])
}

/// Lemma quantities at each exponent; fails if direct and spectral values
/// differ by more than `1e-7 max(1, |zeta|)`.
pub fn lemma_profile(b: &Cocycle, mu: &Measure, ns: &[usize], budget: usize) -> Result<Vec<LemmaReport>> {
    mu.check_admissible()?;
    require_harmonic(b, mu)?;
    if ns.contains(&0) {
        return Err(Error::Precondition("lemma quantity needs n >= 1".into()));
    }
    let spectral = lemma_operator(b, mu)?;
    let limit = spectral.cesaro_limit();
    let scale = mu
        .iter()
        .map(|(x, w)| b.evaluate(&x).map(|v| w * linalg::norm(&v).powi(2)))
        .sum::<Result<f64>>()?
        .max(1.0);
    over_powers(mu, ns, budget, |n, p| {
        let mut sum = CVector::zeros(b.dim() * b.dim());
        for (x, w) in p.iter() {
            sum += tensor_square(&b.evaluate(&x)?) * C64::new(w, 0.0);
        }
        let direct = linalg::norm(&sum) / n as f64;
        let s = spectral.cesaro_spectral(n);
        if (direct - s).abs() > 1e-7 * scale {
            return Err(Error::Consistency {
                what: format!("lemma quantity at n = {n} (direct vs spectral)"),
                left: direct,
                right: s,
            });
        }
        Ok(LemmaReport {
            n,
            direct,
            spectral: s,
            limit,
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondLemmaReport {
    pub n: usize,
    /// `(1/n) sum_x mu^{*n}(x) |<b(x), xi>|^2`
    pub value: f64,
    /// The direct lemma quantity, an upper bound when `|xi| <= 1`.
    pub bound: f64,
    pub holds: bool,
}

pub fn second_lemma_quantity(
    b: &Cocycle,
    mu: &Measure,
    n: usize,
    xi: &CVector,
    budget: usize,
) -> Result<SecondLemmaReport> {
    require_same_model(b, mu)?;
    mu.check_admissible()?;
    require_harmonic(b, mu)?;
    if n == 0 {
        return Err(Error::Precondition("second lemma quantity needs n >= 1".into()));
    }
    if xi.len() != b.dim() || linalg::norm(xi) > 1.0 + 1e-12 {
        return Err(Error::Precondition("xi must be a vector of norm at most 1".into()));
    }
    let p = measures::convolution_power_with(
        mu,
        n,
        PowerOptions {
            budget,
            ..PowerOptions::default()
        },
    )?
    .measure;
    let mut acc = measures::Accumulator::default();
    let mut sum = CVector::zeros(b.dim() * b.dim());
    for (x, w) in p.iter() {
        let v = b.evaluate(&x)?;
        acc.add(w * linalg::inner(&v, xi).norm_sqr());
        sum += tensor_square(&v) * C64::new(w, 0.0);
    }
    let value = acc.value() / n as f64;
    let bound = linalg::norm(&sum) / n as f64;
    Ok(SecondLemmaReport {
        n,
        value,
        bound,
        holds: value <= bound + tol::INEQUALITY,
    })
}

/// The chain `|<b(g), xi>|^2 <= 8 delta(p, gp) S <= lambda_g (H(mu^{*n+1}) - H(mu^{*n})) S`
/// with `p = mu^{*n}`, `S = sum_x |<b(x), xi>|^2 (gp + p)(x)` and
/// `lambda_g = 4 / min(mu(e), mu(g))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub n: usize,
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub sigma_factor: f64,
    pub delta: f64,
    pub entropy_increment: f64,
    pub lambda: f64,
    /// `|<b(g), xi> - sum_x <b(x), xi> (gp - p)(x)|`.
    pub identity_residual: f64,
    pub holds: bool,
}

impl TheoremReport {
    /// `min(mid - lhs, rhs - mid)`.
    pub fn margin(&self) -> f64 {
        (self.mid - self.lhs).min(self.rhs - self.mid)
    }
}

pub fn theorem_inequality_check(
    b: &Cocycle,
    mu: &Measure,
    xi: &CVector,
    g: &GroupElement,
    n: usize,
    budget: usize,
) -> Result<TheoremReport> {
    require_same_model(b, mu)?;
    mu.check_admissible()?;
    require_harmonic(b, mu)?;
    let at_g = mu.mass_at(g);
    if at_g <= 0.0 {
        return Err(Error::Precondition(format!("{g} is not in the support of the measure")));
    }
    if xi.len() != b.dim() || linalg::norm(xi) > 1.0 + 1e-12 {
        return Err(Error::Precondition("xi must be a vector of norm at most 1".into()));
    }
    let opts = PowerOptions {
        budget,
        ..PowerOptions::default()
    };
    let p = measures::convolution_power_with(mu, n, opts)?.measure;
    let next = measures::convolve_with_budget(mu, &p, budget)?;
    let gp = translate(g, &p)?;
    let entropy_increment = entropy(&next) - entropy(&p);
    let lambda = 4.0 / mu.mass_at(&mu.model().identity()).min(at_g);

    let mut sigma = measures::Accumulator::default();
    let (mut re, mut im) = (measures::Accumulator::default(), measures::Accumulator::default());
    for (measure, sign) in [(&gp, 1.0), (&p, -1.0)] {
        for (x, w) in measure.iter() {
            let f = linalg::inner(&b.evaluate(&x)?, xi);
            sigma.add(w * f.norm_sqr());
            re.add(sign * w * f.re);
            im.add(sign * w * f.im);
        }
    }
    let sigma_factor = sigma.value();
    let bg = linalg::inner(&b.evaluate(g)?, xi);
    let identity_residual = (bg - C64::new(re.value(), im.value())).norm();
    let delta = delta_concavity(&p, &gp)?;
    let lhs = bg.norm_sqr();
    let mid = 8.0 * delta * sigma_factor;
    let rhs = lambda * entropy_increment * sigma_factor;
    Ok(TheoremReport {
        n,
        lhs,
        mid,
        rhs,
        sigma_factor,
        delta,
        entropy_increment,
        lambda,
        identity_residual,
        holds: lhs <= mid + tol::INEQUALITY
            && mid <= rhs + tol::INEQUALITY
            && identity_residual <= 1e-8 * bg.norm().max(1.0),
    })
}

/// Growth of `M(m) = max_{|g| <= m} |b(g)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublinearityReport {
    /// `M(m) / m` for `m = 1..=m_max`.
    pub profile: Vec<f64>,
    /// Running minimum of `profile`; its last entry estimates `lim M(m)/m`,
    /// which equals the infimum by subadditivity.
    pub running_min: Vec<f64>,
    /// `M(m1 + m2) <= M(m1) + M(m2)` on the computed range.
    pub subadditive: bool,
    /// Minimal-norm `xi` with `b = d(xi)`, when `b` is a coboundary.
    pub potential: Option<Vec<[f64; 2]>>,
    /// `2 |xi|` for coboundaries.
    pub coboundary_bound: Option<f64>,
    /// `M(m_max) <= 2 |xi|` for coboundaries.
    pub bound_holds: Option<bool>,
}

/// Minimal-norm `xi` with `xi - pi_s xi = b(s)` on every generator, if one exists.
pub fn coboundary_potential(b: &Cocycle) -> Result<Option<CVector>> {
    let d = b.dim();
    let mut gram = CMatrix::zeros(d, d);
    let mut rhs = CVector::zeros(d);
    let indices = b.model().primal_generators();
    for &i in &indices {
        let a = CMatrix::identity(d, d) - b.rep().generator(i);
        rhs += a.adjoint() * b.generator_value(i);
        gram += a.adjoint() * a;
    }
    let eig = HermitianEigen::new(&gram)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(1.0);
    let mut xi = CVector::zeros(d);
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda > tol::RANK * top {
            let q = eig.vector(k);
            xi += &q * (linalg::inner(&rhs, &q) / lambda);
        }
    }
    let scale = vector_scale(&b.primal_values());
    let consistent = indices.iter().all(|&i| {
        let r = &xi - b.rep().generator(i) * &xi - b.generator_value(i);
        linalg::norm(&r) <= tol::COCYCLE * scale
    });
    Ok(consistent.then_some(xi))
}

pub fn sublinearity_profile(b: &Cocycle, m_max: usize, budget: usize) -> Result<SublinearityReport> {
    if m_max == 0 {
        return Err(Error::Precondition("sublinearity profile needs m_max >= 1".into()));
    }
    let ball = b.model().ball(m_max, budget)?;
    let mut sphere_max = Vec::with_capacity(m_max + 1);
    for j in 0..=m_max {
        let mut worst = 0.0f64;
        for g in ball.sphere(j) {
            worst = worst.max(linalg::norm(&b.evaluate(g)?));
        }
        sphere_max.push(worst);
    }
    let mut big_m = sphere_max.clone();
    for j in 1..big_m.len() {
        big_m[j] = big_m[j].max(big_m[j - 1]);
    }
    let profile: Vec<f64> = (1..=m_max).map(|m| big_m[m] / m as f64).collect();
    let mut running_min = profile.clone();
    for j in 1..running_min.len() {
        running_min[j] = running_min[j].min(running_min[j - 1]);
    }
    let slack = tol::COCYCLE * big_m[m_max].max(1.0);
    let subadditive = (1..=m_max).all(|m1| (m1..=m_max - m1).all(|m2| big_m[m1 + m2] <= big_m[m1] + big_m[m2] + slack));
    let potential = coboundary_potential(b)?;
    let coboundary_bound = potential.as_ref().map(|xi| 2.0 * linalg::norm(xi));
    Ok(SublinearityReport {
        profile,
        running_min,
        subadditive,
        bound_holds: coboundary_bound.map(|c| big_m[m_max] <= c + slack),
        potential: potential.as_ref().map(repr::vector_to_json),
        coboundary_bound,
    })
}

/// Finite-scale version of the almost-invariant-vector construction: a unit
/// vector `xi` in the spectral band `[1 - 2 eps, 1 - eps]` of `T` gives the
/// cocycle `b(x) = eps^{-1/2} (xi - pi_x xi)` with energy in `[2, 4]` and
/// harmonicity defect at most `2 eps^{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub group: String,
    pub dim: usize,
    pub epsilon: f64,
    pub band: [f64; 2],
    /// Eigenvalue of `T` at the chosen `xi`.
    pub eigenvalue: f64,
    /// `sum_x mu(x) |b(x)|^2`.
    pub energy: f64,
    /// `2 (1 - eigenvalue) / eps`.
    pub energy_formula: f64,
    /// `|sum_x mu(x) b(x)|`.
    pub defect: f64,
    /// `2 eps^{1/2}`.
    pub defect_bound: f64,
    pub energy_in_window: bool,
    pub defect_within_bound: bool,
    pub holds: bool,
}

const BAND_SLACK: f64 = 1e-12;

/// `1 - max spec(T)`, the top spectral gap, for a representation without
/// invariant vectors.
pub fn top_gap_epsilon(rep: &UnitaryRep, mu: &Measure) -> Result<f64> {
    let eig = HermitianEigen::new(&markov_operator(rep, mu)?)?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    if top >= 1.0 - tol::EIGEN_CLUSTER {
        return Err(Error::Precondition("representation has invariant vectors".into()));
    }
    Ok(1.0 - top)
}

pub fn appendix_construction(rep: &UnitaryRep, mu: &Measure, epsilon: f64) -> Result<(Cocycle, AppendixReport)> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, 1/2], got {epsilon}")));
    }
    let eig = HermitianEigen::new(&markov_operator(rep, mu)?)?;
    if eig.values.last().is_some_and(|&t| t >= 1.0 - tol::EIGEN_CLUSTER) {
        return Err(Error::Precondition(
            "representation has invariant vectors; the construction needs none".into(),
        ));
    }
    let (lower, upper) = (1.0 - 2.0 * epsilon, 1.0 - epsilon);
    let chosen = eig
        .values
        .iter()
        .enumerate()
        .rev()
        .find(|(_, &t)| t >= lower - BAND_SLACK && t <= upper + BAND_SLACK);
    let Some((k, &eigenvalue)) = chosen else {
        let below = eig.values.iter().rev().find(|&&t| t < lower).copied();
        let above = eig.values.iter().find(|&&t| t > upper).copied();
        return Err(Error::EmptyBand {
            lower,
            upper,
            nearest: below.into_iter().chain(above).collect(),
        });
    };
    let xi = eig.vector(k);
    let b = Cocycle::coboundary(rep, &(xi / C64::new(epsilon.sqrt(), 0.0)))?;
    let energy = z1_norm(&b, mu)?.powi(2);
    let defect = harmonicity_defect(&b, mu)?;
    let defect_bound = 2.0 * epsilon.sqrt();
    let energy_in_window = (2.0 - 1e-6..=4.0 + 1e-6).contains(&energy);
    let defect_within_bound = defect <= defect_bound + 1e-6;
    let report = AppendixReport {
        group: rep.model().to_string(),
        dim: rep.dim(),
        epsilon,
        band: [lower, upper],
        eigenvalue,
        energy,
        energy_formula: 2.0 * (1.0 - eigenvalue) / epsilon,
        defect,
        defect_bound,
        energy_in_window,
        defect_within_bound,
        holds: energy_in_window && defect_within_bound,
    };
    Ok((b, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixFamily {
    pub reports: Vec<AppendixReport>,
    /// Defects strictly decrease along the family.
    pub defect_decreasing: bool,
    pub holds: bool,
}

/// The construction on `Z/N` acting on the complement of the constants, lazy
/// walk, with `eps` at the top spectral gap, for each `N` in order.
pub fn appendix_family(orders: &[u64]) -> Result<AppendixFamily> {
    let mut reports = Vec::with_capacity(orders.len());
    for &n in orders {
        let model = GroupModel::cyclic(n)?;
        if n < 3 {
            return Err(Error::Precondition("the appendix family needs N >= 3".into()));
        }
        let rep = UnitaryRep::regular_minus_constants(&model)?;
        let mu = Measure::lazy(&model, 0.5)?;
        let eps = top_gap_epsilon(&rep, &mu)?;
        reports.push(appendix_construction(&rep, &mu, eps)?.1);
    }
    let defect_decreasing = reports.windows(2).all(|w| w[1].defect < w[0].defect);
    let holds = defect_decreasing && reports.iter().all(|r| r.holds);
    Ok(AppendixFamily {
        reports,
        defect_decreasing,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn v1(z: C64) -> CVector {
        CVector::from_element(1, z)
    }

    fn z(d: usize) -> GroupModel {
        GroupModel::FreeAbelian(d)
    }

    fn lazy(model: &GroupModel) -> Measure {
        Measure::lazy(model, 0.5).unwrap()
    }

    fn trivial(model: &GroupModel, d: usize) -> UnitaryRep {
        UnitaryRep::trivial(model, d).unwrap()
    }

    fn chi(model: &GroupModel, values: &[C64]) -> UnitaryRep {
        UnitaryRep::character(model, values).unwrap()
    }

    fn identity_on_z() -> Cocycle {
        Cocycle::new(&trivial(&z(1), 1), vec![v1(c(1.0, 0.0))]).unwrap()
    }

    fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> CVector {
        CVector::from_fn(d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_cocycle(rng: &mut ChaCha8Rng, rep: &UnitaryRep) -> Cocycle {
        cocycle_space_basis(rep)
            .unwrap()
            .iter()
            .fold(Cocycle::zero(rep), |acc, e| {
                acc.add(&e.scale(c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))).unwrap()
            })
    }

    #[test]
    fn evaluate_examples() {
        let b = identity_on_z();
        assert_eq!(linalg::norm(&b.evaluate(&GroupElement::Vector(vec![0])).unwrap()), 0.0);
        for k in -7..=7 {
            let v = b.evaluate_checked(&GroupElement::Vector(vec![k])).unwrap();
            assert!((v[0] - k as f64).norm() < 1e-14);
        }
        let b = Cocycle::new(&chi(&z(1), &[c(0.0, 1.0)]), vec![v1(c(1.0, 0.0))]).unwrap();
        let v = b.evaluate(&GroupElement::Vector(vec![3])).unwrap();
        assert!((v[0] - c(0.0, 1.0)).norm() < 1e-14);
    }

    /// Oracle: the cocycle rule applied one letter at a time along a word.
    fn letterwise(b: &Cocycle, w: &Word) -> CVector {
        let mut v = CVector::zeros(b.dim());
        let mut prefix = CMatrix::identity(b.dim(), b.dim());
        for &s in w.letters() {
            v += &prefix * b.generator_value(s);
            prefix *= b.rep().generator(s);
        }
        v
    }

    #[test]
    fn evaluation_agrees_with_letterwise_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let heis = GroupModel::Heisenberg;
        let rep = UnitaryRep::parse_spec(&heis, "diag:1,i;1,-1").unwrap();
        let b = random_cocycle(&mut rng, &rep);
        for _ in 0..50 {
            let g = GroupElement::Heisenberg(rng.gen_range(-6..=6), rng.gen_range(-6..=6), rng.gen_range(-20..=20));
            let expected = letterwise(&b, &heis.express(&g).unwrap());
            assert!(linalg::norm(&(b.evaluate_checked(&g).unwrap() - expected)) < 1e-10);
        }
        let free = GroupModel::Free(2);
        let rep = UnitaryRep::new(&free, vec![repr::random_unitary(&mut rng, 3), repr::random_unitary(&mut rng, 3)]).unwrap();
        let b = Cocycle::new(&rep, vec![random_vector(&mut rng, 3), random_vector(&mut rng, 3)]).unwrap();
        for g in free.ball(4, DEFAULT_BUDGET).unwrap().elements {
            let expected = letterwise(&b, &free.express(&g).unwrap());
            assert!(linalg::norm(&(b.evaluate(&g).unwrap() - expected)) < 1e-12);
        }
    }

    #[test]
    fn relator_violations_are_named() {
        let rep = chi(&z(2), &[c(0.0, 1.0), c(1.0, 0.0)]);
        let err = Cocycle::new(&rep, vec![v1(c(0.0, 0.0)), v1(c(1.0, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::RelatorViolation { ref relator, .. } if relator == "e1 e2 e1^-1 e2^-1"));
        let cyc = GroupModel::Cyclic(4);
        let err = Cocycle::new(&trivial(&cyc, 1), vec![v1(c(1.0, 0.0))]).unwrap_err();
        assert!(matches!(err, Error::RelatorViolation { .. }));
    }

    #[test]
    fn z1_norm_and_defect_examples() {
        let mu = lazy(&z(1));
        assert_eq!(z1_norm(&Cocycle::zero(&trivial(&z(1), 2)), &mu).unwrap(), 0.0);
        assert!((z1_norm(&identity_on_z(), &mu).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(harmonicity_defect(&identity_on_z(), &mu).unwrap() < 1e-15);
        let b = Cocycle::new(&chi(&z(1), &[c(0.0, 1.0)]), vec![v1(c(1.0, 0.0))]).unwrap();
        assert!((harmonicity_defect(&b, &mu).unwrap() - 2f64.sqrt() / 4.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let free = GroupModel::Free(2);
        let mu = Measure::uniform_with_hold(&free);
        let rep = UnitaryRep::new(&free, vec![repr::random_unitary(&mut rng, 3), repr::random_unitary(&mut rng, 3)]).unwrap();
        let t = markov_operator(&rep, &mu).unwrap();
        for _ in 0..10 {
            let xi = random_vector(&mut rng, 3);
            let d = Cocycle::coboundary(&rep, &xi).unwrap();
            let expected = 2.0 * (linalg::inner(&xi, &xi) - linalg::inner(&(&t * &xi), &xi)).re;
            assert!((z1_norm(&d, &mu).unwrap().powi(2) - expected).abs() < 1e-12);
            let expected = linalg::norm(&(&xi - &t * &xi));
            assert!((harmonicity_defect(&d, &mu).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn coboundary_examples() {
        let zero = Cocycle::coboundary(&trivial(&z(1), 2), &CVector::zeros(2)).unwrap();
        assert!(zero.primal_values().iter().all(|v| linalg::norm(v) == 0.0));
        let xi = CVector::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5)]);
        let d = Cocycle::coboundary(&trivial(&z(2), 2), &xi).unwrap();
        assert!(d.primal_values().iter().all(|v| linalg::norm(v) == 0.0));
        let d = Cocycle::coboundary(&chi(&z(1), &[c(0.0, 1.0)]), &v1(c(1.0, 0.0))).unwrap();
        assert!((d.primal_values()[0][0] - c(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn orthogonality_identity_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cases: Vec<(GroupModel, &str)> = vec![
            (z(1), "char:0.3pi"),
            (z(2), "diag:1,i;-1,0.25pi"),
            (GroupModel::Heisenberg, "char:i,-1"),
            (GroupModel::Cyclic(6), "regular"),
        ];
        for (model, spec) in cases {
            let rep = UnitaryRep::parse_spec(&model, spec).unwrap();
            let mu = Measure::uniform_with_hold(&model);
            for _ in 0..20 {
                let b = random_cocycle(&mut rng, &rep);
                let xi = random_vector(&mut rng, rep.dim());
                let r = orthogonality_identity(&b, &mu, &xi).unwrap();
                assert!(r.holds, "{model} {spec}: {r:?}");
            }
        }
    }

    #[test]
    fn projection_examples() {
        let mu = lazy(&z(1));
        let rep = chi(&z(1), &[c(0.0, 1.0)]);
        let d = Cocycle::coboundary(&rep, &v1(c(0.3, -2.0))).unwrap();
        let p = harmonic_projection(&d, &mu).unwrap();
        assert!(p.report.harmonic_part_zero && p.report.norm_after < 1e-12);

        let b = Cocycle::new(&rep, vec![v1(c(1.0, 0.0))]).unwrap();
        let p = harmonic_projection(&b, &mu).unwrap();
        assert!(p.report.norm_after < 1e-12);
        // (1 - 1/2) xi = v with v = (1 + i)/4.
        assert!((p.xi[0] - c(0.5, 0.5)).norm() < 1e-12);

        let b = Cocycle::new(&trivial(&z(2), 1), vec![v1(c(1.0, 0.0)), v1(c(2.0, 0.0))]).unwrap();
        let p = harmonic_projection(&b, &lazy(&z(2))).unwrap();
        assert!(p.report.defect_before < 1e-15);
        assert!((p.report.norm_after - p.report.norm_before).abs() < 1e-15);
        assert!(linalg::norm(&p.xi) < 1e-15);
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cases: Vec<(GroupModel, &str)> = vec![
            (z(1), "diag:1,i,-1"),
            (z(2), "diag:1,i;1,1"),
            (GroupModel::Heisenberg, "diag:1,-i;1,0.5pi"),
            (GroupModel::Cyclic(5), "regular"),
        ];
        for (model, spec) in cases {
            let rep = UnitaryRep::parse_spec(&model, spec).unwrap();
            let mu = Measure::uniform_with_hold(&model);
            for _ in 0..10 {
                let b = random_cocycle(&mut rng, &rep);
                let p = harmonic_projection(&b, &mu).unwrap();
                assert!(p.report.defect_after <= 1e-9);
                assert!(p.report.norm_after <= p.report.norm_before + 1e-12);
                let again = harmonic_projection(&p.harmonic, &mu).unwrap();
                assert!(linalg::norm(&again.xi) < 1e-9);
                let diff = again.harmonic.sub(&p.harmonic).unwrap();
                assert!(z1_norm(&diff, &mu).unwrap() < 1e-9);
                let eta = random_vector(&mut rng, rep.dim());
                let ip = z1_inner(&p.harmonic, &Cocycle::coboundary(&rep, &eta).unwrap(), &mu).unwrap();
                assert!(ip.norm() < 1e-9, "{model} {spec}: {ip}");
            }
        }
    }

    #[test]
    fn harmonic_dimensions() {
        let cases: Vec<(GroupModel, &str, usize)> = vec![
            (z(1), "trivial", 1),
            (z(1), "char:-1", 0),
            (z(1), "char:i", 0),
            (z(2), "trivial", 2),
            (z(3), "trivial", 3),
            (z(2), "trivial:2", 4),
            (GroupModel::Heisenberg, "trivial", 2),
            (GroupModel::Heisenberg, "char:i,1", 0),
            (GroupModel::Free(2), "trivial", 2),
            (GroupModel::Cyclic(5), "trivial", 0),
            (GroupModel::Cyclic(5), "regular", 0),
        ];
        for (model, spec, expected) in cases {
            let rep = UnitaryRep::parse_spec(&model, spec).unwrap();
            let mu = lazy(&model);
            assert_eq!(harmonic_space_dimension(&model, &rep, &mu).unwrap(), expected, "{model} {spec}");
        }
        // A free group has H^1 of dimension (k - 1) d + dim of invariants.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let free = GroupModel::Free(2);
        let rep = UnitaryRep::new(&free, vec![repr::random_unitary(&mut rng, 3), repr::random_unitary(&mut rng, 3)]).unwrap();
        assert_eq!(harmonic_space_dimension(&free, &rep, &Measure::uniform_with_hold(&free)).unwrap(), 3);
    }

    #[test]
    fn energy_identity_examples() {
        let mu = lazy(&z(1));
        let b = identity_on_z();
        let r = energy_identity_check(&b, &mu, 10, DEFAULT_BUDGET).unwrap();
        assert!((r.lhs - 5.0).abs() < 1e-8 && (r.rhs - 5.0).abs() < 1e-8 && r.holds);
        let one = energy_identity_check(&b, &mu, 1, DEFAULT_BUDGET).unwrap();
        assert!((one.lhs - one.rhs).abs() < 1e-15);
        let ns: Vec<usize> = (1..=50).collect();
        assert!(energy_identity_profile(&b, &mu, &ns, DEFAULT_BUDGET).unwrap().iter().all(|r| r.holds));

        let b2 = Cocycle::new(&trivial(&z(2), 1), vec![v1(c(1.0, 0.5)), v1(c(-2.0, 0.0))]).unwrap();
        let r = energy_identity_check(&b2, &lazy(&z(2)), 8, DEFAULT_BUDGET).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-9 * r.rhs);

        let nonharmonic = Cocycle::new(&chi(&z(1), &[c(0.0, 1.0)]), vec![v1(c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            energy_identity_check(&nonharmonic, &mu, 3, DEFAULT_BUDGET),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lemma_examples() {
        let mu = lazy(&z(1));
        let b = identity_on_z();
        for r in lemma_profile(&b, &mu, &[1, 2, 10, 40], DEFAULT_BUDGET).unwrap() {
            assert!((r.direct - 0.5).abs() < 1e-12 && (r.spectral - 0.5).abs() < 1e-12);
            assert!((r.limit - 0.5).abs() < 1e-12);
        }
        // A 2-dimensional rep whose tensor square is not trivial.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let heis = GroupModel::Heisenberg;
        let rep = UnitaryRep::parse_spec(&heis, "diag:1,i;1,-1").unwrap();
        let mu = lazy(&heis);
        let b = harmonic_projection(&random_cocycle(&mut rng, &rep), &mu).unwrap().harmonic;
        let rs = lemma_profile(&b, &mu, &[1, 3, 7, 12], DEFAULT_BUDGET).unwrap();
        for r in &rs {
            assert!((r.direct - r.spectral).abs() < 1e-7);
        }
    }

    #[test]
    fn second_lemma_examples() {
        let mu = lazy(&z(1));
        let b = identity_on_z();
        let r = second_lemma_quantity(&b, &mu, 10, &v1(c(0.0, 0.0)), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.value, 0.0);
        let r = second_lemma_quantity(&b, &mu, 10, &v1(c(1.0, 0.0)), DEFAULT_BUDGET).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12 && r.holds);

        let z2 = z(2);
        let rep = UnitaryRep::parse_spec(&z2, "diag:1,i;1,-1").unwrap();
        let b = Cocycle::new(
            &rep,
            vec![
                CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
                CVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.0)]),
            ],
        )
        .unwrap();
        let xi = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let r = second_lemma_quantity(&b, &lazy(&z2), 6, &xi, DEFAULT_BUDGET).unwrap();
        assert!(r.value.abs() < 1e-15 && r.holds);
    }

    /// Dense oracle for the lazy walk on Z: mu^{*n} as a vector indexed by `k + n`.
    fn dense_lazy_power(n: usize) -> Vec<f64> {
        let mut p = vec![1.0];
        for _ in 0..n {
            let mut q = vec![0.0; p.len() + 2];
            for (i, &w) in p.iter().enumerate() {
                q[i] += 0.25 * w;
                q[i + 1] += 0.5 * w;
                q[i + 2] += 0.25 * w;
            }
            p = q;
        }
        p
    }

    #[test]
    fn theorem_chain_on_z() {
        let n = 10;
        let r = theorem_inequality_check(
            &identity_on_z(),
            &lazy(&z(1)),
            &v1(c(1.0, 0.0)),
            &GroupElement::Vector(vec![1]),
            n,
            DEFAULT_BUDGET,
        )
        .unwrap();
        let p = dense_lazy_power(n);
        let p_next = dense_lazy_power(n + 1);
        let h = |q: &[f64]| -q.iter().filter(|&&w| w > 0.0).map(|&w| w * w.ln()).sum::<f64>();
        let sigma: f64 = p
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let k = i as f64 - n as f64;
                w * (k * k + (k + 1.0) * (k + 1.0))
            })
            .sum();
        assert!((sigma - 11.0).abs() < 1e-12);
        assert!((r.sigma_factor - 11.0).abs() < 1e-12);
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert_eq!(r.lambda, 16.0);
        assert!((r.rhs - 16.0 * (h(&p_next) - h(&p)) * 11.0).abs() < 1e-10);
        assert!(r.holds && r.identity_residual < 1e-12);

        let zero = Cocycle::zero(&trivial(&z(1), 1));
        let r = theorem_inequality_check(&zero, &lazy(&z(1)), &v1(c(1.0, 0.0)), &GroupElement::Vector(vec![1]), 5, DEFAULT_BUDGET)
            .unwrap();
        assert!(r.lhs == 0.0 && r.mid == 0.0 && r.holds);
    }

    #[test]
    fn theorem_chain_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cases: Vec<(GroupModel, &str)> = vec![
            (z(2), "trivial"),
            (z(2), "diag:1,i;1,1"),
            (GroupModel::Heisenberg, "diag:1,-1;1,i"),
        ];
        for (model, spec) in cases {
            let rep = UnitaryRep::parse_spec(&model, spec).unwrap();
            let mu = lazy(&model);
            for _ in 0..3 {
                let b = harmonic_projection(&random_cocycle(&mut rng, &rep), &mu).unwrap().harmonic;
                let mut xi = random_vector(&mut rng, rep.dim());
                xi /= c(linalg::norm(&xi), 0.0);
                let g = model.generators()[rng.gen_range(0..model.generator_count())].clone();
                let n = rng.gen_range(1..=12);
                let r = theorem_inequality_check(&b, &mu, &xi, &g, n, DEFAULT_BUDGET).unwrap();
                assert!(r.holds, "{model} {spec} n={n}: {r:?}");
            }
        }
    }

    #[test]
    fn sublinearity_examples() {
        let r = sublinearity_profile(&identity_on_z(), 10, DEFAULT_BUDGET).unwrap();
        assert!(r.profile.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(r.subadditive && r.potential.is_none());

        let rep = chi(&z(1), &[c(0.0, 1.0)]);
        let b = Cocycle::new(&rep, vec![v1(c(1.0, 0.0))]).unwrap();
        let r = sublinearity_profile(&b, 20, DEFAULT_BUDGET).unwrap();
        let xi = r.potential.clone().unwrap();
        // xi = (1 - i)^{-1} = (1 + i)/2.
        assert!((xi[0][0] - 0.5).abs() < 1e-12 && (xi[0][1] - 0.5).abs() < 1e-12);
        assert_eq!(r.bound_holds, Some(true));
        for (m, &x) in r.profile.iter().enumerate() {
            assert!(x <= 2.0 / (m + 1) as f64 + 1e-12);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let heis = GroupModel::Heisenberg;
        let rep = UnitaryRep::parse_spec(&heis, "diag:i,-1;0.3pi,1").unwrap();
        let xi = random_vector(&mut rng, 2);
        let r = sublinearity_profile(&Cocycle::coboundary(&rep, &xi).unwrap(), 6, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.bound_holds, Some(true));
        assert!(r.subadditive);
    }

    #[test]
    fn appendix_examples() {
        let model = GroupModel::Cyclic(64);
        let rep = UnitaryRep::regular_minus_constants(&model).unwrap();
        let mu = lazy(&model);
        let eps = top_gap_epsilon(&rep, &mu).unwrap();
        let top = 0.5 + 0.5 * (2.0 * std::f64::consts::PI / 64.0).cos();
        assert!((eps - (1.0 - top)).abs() < 1e-12);
        let (_, r) = appendix_construction(&rep, &mu, eps).unwrap();
        assert!(r.holds);
        assert!((r.energy - 2.0).abs() < 1e-8 && (r.energy_formula - 2.0).abs() < 1e-8);
        assert!((r.defect - eps.sqrt()).abs() < 1e-8);

        // A band strictly between 1 - 2 eps' and 1 - eps' with no spectrum.
        let err = appendix_construction(&rep, &mu, eps / 4.0).unwrap_err();
        assert!(matches!(err, Error::EmptyBand { ref nearest, .. } if !nearest.is_empty()));
        assert!(matches!(
            appendix_construction(&trivial(&model, 1), &mu, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn appendix_family_decreases() {
        let f = appendix_family(&[8, 16, 32]).unwrap();
        assert!(f.holds && f.defect_decreasing);
    }

    #[test]
    fn json_round_trip() {
        let rep = UnitaryRep::parse_spec(&z(2), "diag:1,i;1,-1").unwrap();
        let b = Cocycle::new(
            &rep,
            vec![
                CVector::from_vec(vec![c(1.0, 0.25), c(0.0, 0.0)]),
                CVector::from_vec(vec![c(-0.5, 0.0), c(0.0, 0.0)]),
            ],
        )
        .unwrap();
        let text = serde_json::to_string(&b.to_json()).unwrap();
        let back = Cocycle::from_json(&z(2), &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.to_json(), b.to_json());
        let named: CocycleJson = serde_json::from_str(r#"{"rep":"char:i","values":{"e1":[[1,0]]}}"#).unwrap();
        let b = Cocycle::from_json(&z(1), &named).unwrap();
        assert!((b.generator_value(1)[0] - c(0.0, 1.0)).norm() < 1e-15);
    }
}
