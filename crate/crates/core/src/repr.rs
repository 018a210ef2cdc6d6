//! Finite-dimensional unitary representations, their Markov operators and
//! the spectral form of Cesaro averages `(1/n)(I + T + ... + T^{n-1}) zeta`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel, Word};
use crate::linalg::{self, CMatrix, CVector, HermitianEigen, C64};
use crate::measures::Measure;
use crate::tol;

/// Largest representation dimension accepted by [`UnitaryRep::tensor_conjugate`].
pub const MAX_TENSOR_BASE_DIM: usize = 64;

/// One unitary matrix per generator of a finitely presented model (or a free
/// group). Inverse generators carry the adjoint of their partner.
#[derive(Clone, Debug)]
pub struct UnitaryRep {
    model: GroupModel,
    dim: usize,
    matrices: Vec<CMatrix>,
}

fn require_supported(model: &GroupModel, operation: &str) -> Result<()> {
    if model.is_finitely_presented() || matches!(model, GroupModel::Free(_)) {
        Ok(())
    } else {
        Err(Error::UnsupportedFamily {
            family: model.to_string(),
            operation: operation.into(),
        })
    }
}

impl UnitaryRep {
    /// `primal[j]` is the matrix of generator `model.primal_generators()[j]`.
    pub fn new(model: &GroupModel, primal: Vec<CMatrix>) -> Result<Self> {
        require_supported(model, "unitary representations")?;
        let indices = model.primal_generators();
        if primal.len() != indices.len() {
            return Err(Error::Precondition(format!(
                "{model} needs {} generator matrices, got {}",
                indices.len(),
                primal.len()
            )));
        }
        let dim = primal.first().map_or(0, |m| m.nrows());
        if dim == 0 {
            return Err(Error::Precondition("representation dimension must be positive".into()));
        }
        let mut matrices = vec![CMatrix::identity(dim, dim); model.generator_count()];
        for (&i, m) in indices.iter().zip(primal) {
            let label = model.generator_label(i);
            if m.shape() != (dim, dim) {
                return Err(Error::Precondition(format!(
                    "matrix for {label} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let defect = linalg::unitarity_defect(&m);
            if defect > tol::UNITARY {
                return Err(Error::Precondition(format!(
                    "matrix for {label} is not unitary (defect {defect:.3e})"
                )));
            }
            matrices[model.inverse_generator(i)] = m.adjoint();
            matrices[i] = m;
        }
        let rep = UnitaryRep {
            model: model.clone(),
            dim,
            matrices,
        };
        rep.check_relators()?;
        Ok(rep)
    }

    fn check_relators(&self) -> Result<()> {
        if !self.model.is_finitely_presented() {
            return Ok(());
        }
        let id = CMatrix::identity(self.dim, self.dim);
        for r in self.model.relators()? {
            let residual = linalg::max_abs_diff(&self.evaluate(&r), &id);
            if residual > tol::UNITARY {
                return Err(Error::RelatorViolation {
                    relator: self.model.format_word(&r),
                    residual,
                });
            }
        }
        Ok(())
    }

    pub fn trivial(model: &GroupModel, dim: usize) -> Result<Self> {
        let k = model.primal_generators().len();
        Self::new(model, vec![CMatrix::identity(dim, dim); k])
    }

    /// One-dimensional representation with the given value per primal generator.
    pub fn character(model: &GroupModel, values: &[C64]) -> Result<Self> {
        Self::new(
            model,
            values.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect(),
        )
    }

    /// Diagonal representation; `diagonals[j]` is the diagonal for primal generator `j`.
    pub fn diagonal(model: &GroupModel, diagonals: &[Vec<C64>]) -> Result<Self> {
        Self::new(
            model,
            diagonals
                .iter()
                .map(|d| CMatrix::from_diagonal(&CVector::from_vec(d.clone())))
                .collect(),
        )
    }

    pub fn direct_sum(&self, other: &UnitaryRep) -> Result<Self> {
        if self.model != other.model {
            return Err(Error::ModelMismatch {
                left: self.model.to_string(),
                right: other.model.to_string(),
            });
        }
        let d = self.dim + other.dim;
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let mut m = CMatrix::zeros(d, d);
                m.view_mut((0, 0), (self.dim, self.dim)).copy_from(a);
                m.view_mut((self.dim, self.dim), (other.dim, other.dim)).copy_from(b);
                m
            })
            .collect();
        Ok(UnitaryRep {
            model: self.model.clone(),
            dim: d,
            matrices,
        })
    }

    /// The regular representation of `Z/N` on the orthogonal complement of
    /// the constants, in the Helmert orthonormal basis. The generator acts
    /// by the cyclic shift `e_j -> e_{j+1}`.
    pub fn regular_minus_constants(model: &GroupModel) -> Result<Self> {
        let GroupModel::Cyclic(n) = *model else {
            return Err(Error::UnsupportedFamily {
                family: model.to_string(),
                operation: "regular representation minus constants".into(),
            });
        };
        let n = usize::try_from(n)
            .ok()
            .filter(|&n| n <= 4096)
            .ok_or_else(|| Error::Precondition(format!("cyclic order {n} too large for a dense representation")))?;
        // Column k - 1 (k = 1..n) of the Helmert basis.
        let helmert = DMatrix::<f64>::from_fn(n, n - 1, |j, c| {
            let k = c + 1;
            let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
            match j.cmp(&k) {
                std::cmp::Ordering::Less => s,
                std::cmp::Ordering::Equal => -(k as f64) * s,
                std::cmp::Ordering::Greater => 0.0,
            }
        });
        // (P H)[j, c] = H[j - 1, c].
        let shifted = DMatrix::<f64>::from_fn(n, n - 1, |j, c| helmert[((j + n - 1) % n, c)]);
        let u = helmert.transpose() * shifted;
        Self::new(model, vec![u.map(|x| C64::new(x, 0.0))])
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix of generator `i` (any index, including inverses).
    pub fn generator(&self, i: usize) -> &CMatrix {
        &self.matrices[i]
    }

    /// Product of generator matrices along `w`; runs of equal letters use
    /// repeated squaring.
    pub fn evaluate(&self, w: &Word) -> CMatrix {
        let mut acc = CMatrix::identity(self.dim, self.dim);
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let mut j = i;
            while j < letters.len() && letters[j] == letters[i] {
                j += 1;
            }
            acc *= matrix_power(&self.matrices[letters[i]], j - i);
            i = j;
        }
        acc
    }

    pub fn evaluate_element(&self, g: &GroupElement) -> Result<CMatrix> {
        Ok(self.evaluate(&self.model.express(g)?))
    }

    /// `g -> pi_g (x) conj(pi_g)` on `C^d (x) C^d`, basis index `(j, k) -> j d + k`.
    pub fn tensor_conjugate(&self) -> Result<UnitaryRep> {
        if self.dim > MAX_TENSOR_BASE_DIM {
            return Err(Error::Precondition(format!(
                "tensor square of a {}-dimensional representation exceeds the cap {MAX_TENSOR_BASE_DIM}",
                self.dim
            )));
        }
        Ok(UnitaryRep {
            model: self.model.clone(),
            dim: self.dim * self.dim,
            matrices: self
                .matrices
                .iter()
                .map(|u| linalg::kron(u, &u.map(|z| z.conj())))
                .collect(),
        })
    }

    pub fn to_json(&self) -> RepJson {
        let generators = self
            .model
            .primal_generators()
            .into_iter()
            .map(|i| (self.model.generator_label(i), matrix_to_json(&self.matrices[i])))
            .collect();
        RepJson {
            dim: self.dim,
            generators,
        }
    }

    pub fn from_json(model: &GroupModel, json: &RepJson) -> Result<Self> {
        for label in json.generators.keys() {
            match model.generator_index(label) {
                Some(i) if model.primal_generators().contains(&i) => {}
                _ => {
                    return Err(Error::parse(
                        "rep.generators",
                        format!("{label:?} is not a generator label of {model}"),
                    ))
                }
            }
        }
        let mut primal = Vec::new();
        for i in model.primal_generators() {
            let label = model.generator_label(i);
            let m = match json.generators.get(&label) {
                Some(rows) => matrix_from_json(&label, rows, json.dim)?,
                None => return Err(Error::parse("rep.generators", format!("missing generator {label:?}"))),
            };
            primal.push(m);
        }
        Self::new(model, primal)
    }
}

fn matrix_power(m: &CMatrix, mut e: usize) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// A representation given either by a built-in spec string or by explicit matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepSource {
    Named(String),
    Explicit(RepJson),
}

impl RepSource {
    pub fn resolve(&self, model: &GroupModel) -> Result<UnitaryRep> {
        match self {
            RepSource::Named(s) => UnitaryRep::parse_spec(model, s),
            RepSource::Explicit(json) => UnitaryRep::from_json(model, json),
        }
    }
}

/// One character value: `1`, `-1`, `i`, `-i`, or `<x>pi` for `e^{i pi x}`.
fn parse_phase(token: &str) -> Result<C64> {
    let t = token.trim();
    let value = match t {
        "1" => C64::new(1.0, 0.0),
        "-1" => C64::new(-1.0, 0.0),
        "i" => C64::new(0.0, 1.0),
        "-i" => C64::new(0.0, -1.0),
        _ => {
            let x = t
                .strip_suffix("pi")
                .and_then(|x| match x {
                    "" => Some(1.0),
                    "-" => Some(-1.0),
                    _ => x.parse::<f64>().ok(),
                })
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    Error::parse("rep", format!("bad character value {t:?} (use 1, -1, i, -i or <x>pi)"))
                })?;
            C64::from_polar(1.0, std::f64::consts::PI * x)
        }
    };
    Ok(value)
}

impl UnitaryRep {
    /// Built-in representations:
    /// `trivial[:d]`, `char:v1,v2,...` (one value per primal generator, or a
    /// single value for all), `diag:v,w;v,w` (one diagonal per primal
    /// generator, or one for all) and `regular` (cyclic groups, complement of
    /// the constants). Values are as in `char`.
    pub fn parse_spec(model: &GroupModel, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let k = model.primal_generators().len();
        let broadcast = |groups: Vec<Vec<C64>>| -> Result<Vec<Vec<C64>>> {
            match groups.len() {
                1 => Ok(vec![groups[0].clone(); k]),
                n if n == k => Ok(groups),
                n => Err(Error::parse(
                    "rep",
                    format!("{model} has {k} generators but {n} were given"),
                )),
            }
        };
        match head {
            "trivial" => {
                let d = if rest.is_empty() {
                    1
                } else {
                    rest.parse::<usize>()
                        .ok()
                        .filter(|&d| d > 0)
                        .ok_or_else(|| Error::parse("rep", format!("bad dimension {rest:?}")))?
                };
                Self::trivial(model, d)
            }
            "char" => {
                let values: Vec<Vec<C64>> = rest
                    .split(',')
                    .map(|t| parse_phase(t).map(|z| vec![z]))
                    .collect::<Result<_>>()?;
                let values = broadcast(values)?;
                Self::diagonal(model, &values)
            }
            "diag" => {
                let groups: Vec<Vec<C64>> = rest
                    .split(';')
                    .map(|g| g.split(',').map(parse_phase).collect::<Result<Vec<_>>>())
                    .collect::<Result<_>>()?;
                let d = groups[0].len();
                if groups.iter().any(|g| g.len() != d) {
                    return Err(Error::parse("rep", "diagonals have different lengths"));
                }
                Self::diagonal(model, &broadcast(groups)?)
            }
            "regular" if rest.is_empty() => Self::regular_minus_constants(model),
            _ => Err(Error::parse(
                "rep",
                format!("unknown representation {spec:?} (expected trivial[:d], char:..., diag:..., regular)"),
            )),
        }
    }
}

/// Serialized form: rows of `[re, im]` pairs per primal generator label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepJson {
    pub dim: usize,
    pub generators: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn matrix_from_json(label: &str, rows: &[Vec<[f64; 2]>], dim: usize) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::parse(
            "rep.generators",
            format!("matrix for {label:?} is not {dim}x{dim}"),
        ));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

pub fn vector_to_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1])))
}

/// `T = sum_x mu(x) pi_x`, validated Hermitian and contractive.
pub fn markov_operator(rep: &UnitaryRep, mu: &Measure) -> Result<CMatrix> {
    if rep.model() != mu.model() {
        return Err(Error::ModelMismatch {
            left: rep.model().to_string(),
            right: mu.model().to_string(),
        });
    }
    mu.check_admissible()?;
    let mut t = CMatrix::zeros(rep.dim(), rep.dim());
    for (x, w) in mu.iter() {
        t += rep.evaluate_element(&x)? * C64::new(w, 0.0);
    }
    let defect = linalg::hermiticity_defect(&t);
    if defect > tol::HERMITIAN {
        return Err(Error::Consistency {
            what: "Markov operator self-adjointness".into(),
            left: defect,
            right: tol::HERMITIAN,
        });
    }
    let t = (&t + t.adjoint()).scale(0.5);
    let norm = linalg::hermitian_norm(&t)?;
    if norm > 1.0 + tol::EIGEN_CLUSTER {
        return Err(Error::Consistency {
            what: "Markov operator norm".into(),
            left: norm,
            right: 1.0,
        });
    }
    Ok(t)
}

/// `sum_x mu(x) pi_x (x) conj(pi_x)`.
pub fn tensor_markov_operator(rep: &UnitaryRep, mu: &Measure) -> Result<CMatrix> {
    markov_operator(&rep.tensor_conjugate()?, mu)
}

/// Dimension of the eigenvalue-1 eigenspace of `sum_x mu(x) pi_x`, which is
/// the space of `pi`-invariant vectors when `mu` is admissible.
pub fn invariant_vectors_dim(rep: &UnitaryRep, mu: &Measure) -> Result<usize> {
    let eig = HermitianEigen::new(&markov_operator(rep, mu)?)?;
    Ok(eig
        .values
        .iter()
        .filter(|&&t| (1.0 - t).abs() <= tol::EIGEN_CLUSTER)
        .count())
}

/// Atomic measure `m = <E_T(.) zeta, zeta>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    /// `(eigenvalue, mass)`, eigenvalues ascending.
    pub atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `m({1})`, counting eigenvalues within [`tol::EIGEN_CLUSTER`] of 1.
    pub fn mass_at_one(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0 >= 1.0 - tol::EIGEN_CLUSTER)
            .map(|a| a.1)
            .sum()
    }
}

/// Eigendecomposition of a contraction `T` together with the coordinates of
/// `zeta` in the eigenbasis.
#[derive(Clone, Debug)]
pub struct Spectral {
    t: CMatrix,
    zeta: CVector,
    eigen: HermitianEigen,
    /// `|<zeta, v_i>|^2` per eigenvector.
    weights: Vec<f64>,
}

impl Spectral {
    pub fn new(t: &CMatrix, zeta: &CVector) -> Result<Self> {
        if zeta.len() != t.nrows() {
            return Err(Error::Precondition(format!(
                "vector of length {} for a {}x{} operator",
                zeta.len(),
                t.nrows(),
                t.ncols()
            )));
        }
        let eigen = HermitianEigen::new(t)?;
        if let Some(&bad) = eigen
            .values
            .iter()
            .find(|v| v.abs() > 1.0 + tol::EIGEN_CLUSTER)
        {
            return Err(Error::Precondition(format!(
                "operator is not a contraction (eigenvalue {bad})"
            )));
        }
        let weights: Vec<f64> = (0..eigen.dim())
            .map(|i| linalg::inner(zeta, &eigen.vector(i)).norm_sqr())
            .collect();
        let total: f64 = weights.iter().sum();
        let expected = linalg::norm(zeta).powi(2);
        if (total - expected).abs() > 1e-8 * expected.max(1.0) {
            return Err(Error::Consistency {
                what: "spectral mass".into(),
                left: total,
                right: expected,
            });
        }
        Ok(Spectral {
            t: t.clone(),
            zeta: zeta.clone(),
            eigen,
            weights,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// Atoms with eigenvalues merged when consecutive gaps are within
    /// [`tol::EIGEN_CLUSTER`]; eigenvalues clipped to `[-1, 1]`.
    pub fn measure(&self) -> SpectralMeasure {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut members = 0usize;
        let mut last = f64::NEG_INFINITY;
        for (&t, &w) in self.eigen.values.iter().zip(&self.weights) {
            let t = t.clamp(-1.0, 1.0);
            match atoms.last_mut() {
                Some(atom) if t - last <= tol::EIGEN_CLUSTER => {
                    members += 1;
                    atom.0 += (t - atom.0) / members as f64;
                    atom.1 += w;
                }
                _ => {
                    atoms.push((t, w));
                    members = 1;
                }
            }
            last = t;
        }
        SpectralMeasure { atoms }
    }

    /// `(1/n) |(I + T + ... + T^{n-1}) zeta|` from the eigenpairs.
    pub fn cesaro_spectral(&self, n: usize) -> f64 {
        self.eigen
            .values
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * cesaro_factor(t, n).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The same norm by iterating `T` on `zeta`, reported at each requested
    /// exponent (ascending).
    pub fn cesaro_direct_profile(&self, ns: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(ns.len());
        let mut power = self.zeta.clone();
        let mut sum = CVector::zeros(self.zeta.len());
        let mut k = 0;
        for &n in ns {
            while k < n {
                sum += &power;
                power = &self.t * &power;
                k += 1;
            }
            out.push(if n == 0 { 0.0 } else { linalg::norm(&sum) / n as f64 });
        }
        out
    }

    pub fn cesaro_direct(&self, n: usize) -> f64 {
        self.cesaro_direct_profile(&[n])[0]
    }

    /// `sqrt(m({1}))`.
    pub fn cesaro_limit(&self) -> f64 {
        self.eigen
            .values
            .iter()
            .zip(&self.weights)
            .filter(|(&t, _)| t >= 1.0 - tol::EIGEN_CLUSTER)
            .map(|(_, &w)| w)
            .sum::<f64>()
            .sqrt()
    }

    /// Direct and spectral norms at each exponent; fails if any pair differs
    /// by more than [`tol::CESARO_HARD`] relative to `max(1, |zeta|)`.
    pub fn cesaro_profile(&self, ns: &[usize]) -> Result<Vec<CesaroValue>> {
        let mut sorted = ns.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let direct = self.cesaro_direct_profile(&sorted);
        let scale = linalg::norm(&self.zeta).max(1.0);
        let mut out = Vec::with_capacity(sorted.len());
        for (&n, &d) in sorted.iter().zip(&direct) {
            let s = self.cesaro_spectral(n);
            if (d - s).abs() > tol::CESARO_HARD * scale {
                return Err(Error::Consistency {
                    what: format!("Cesaro norm at n = {n} (direct vs spectral)"),
                    left: d,
                    right: s,
                });
            }
            out.push(CesaroValue {
                n,
                direct: d,
                spectral: s,
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroValue {
    pub n: usize,
    pub direct: f64,
    pub spectral: f64,
}

/// `(1 + t + ... + t^{n-1}) / n` for `t` in `[-1, 1]`.
pub fn cesaro_factor(t: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    if t >= 1.0 {
        1.0
    } else if t > 0.0 {
        // 1 - t^n without cancellation near t = 1.
        let one_minus_tn = -(nf * (t - 1.0).ln_1p()).exp_m1();
        one_minus_tn / (nf * (1.0 - t))
    } else {
        let tn = if n <= i32::MAX as usize {
            t.powi(n as i32)
        } else {
            t.powf(nf)
        };
        (1.0 - tn) / (nf * (1.0 - t))
    }
}

pub fn spectral_measure(t: &CMatrix, zeta: &CVector) -> Result<SpectralMeasure> {
    Ok(Spectral::new(t, zeta)?.measure())
}

pub fn cesaro_norm(t: &CMatrix, zeta: &CVector, n: usize) -> Result<CesaroValue> {
    Ok(Spectral::new(t, zeta)?.cesaro_profile(&[n])?[0])
}

pub fn cesaro_limit(t: &CMatrix, zeta: &CVector) -> Result<f64> {
    Ok(Spectral::new(t, zeta)?.cesaro_limit())
}

/// Haar-like random unitary from Gram-Schmidt on complex Gaussian columns.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let normal = |rng: &mut R| {
        // Box-Muller.
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let v: f64 = rng.gen();
        let r = (-2.0 * u.ln()).sqrt();
        C64::new(r * (std::f64::consts::TAU * v).cos(), r * (std::f64::consts::TAU * v).sin())
    };
    let mut q = CMatrix::zeros(dim, dim);
    let mut j = 0;
    while j < dim {
        let mut v = CVector::from_fn(dim, |_, _| normal(rng));
        for _ in 0..2 {
            for k in 0..j {
                let col = q.column(k).into_owned();
                v -= &col * linalg::inner(&v, &col);
            }
        }
        let nv = linalg::norm(&v);
        if nv > 1e-8 {
            q.set_column(j, &(v / C64::new(nv, 0.0)));
            j += 1;
        }
    }
    q
}

/// `Q diag(eigenvalues) Q*` for a random unitary `Q`.
pub fn hermitian_with_spectrum<R: Rng>(rng: &mut R, eigenvalues: &[f64]) -> CMatrix {
    let q = random_unitary(rng, eigenvalues.len());
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        eigenvalues.len(),
        eigenvalues.iter().map(|&t| C64::new(t, 0.0)),
    ));
    let m = &q * d * q.adjoint();
    (&m + m.adjoint()).scale(0.5)
}
