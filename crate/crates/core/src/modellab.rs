//! Exact checks on the model singularity `M_t ⊂ M_{m,n}`: fibres of the
//! Tjurina, transpose Tjurina and Nash transforms, the limit sequences that
//! reach every point of the Nash fibre, and the two sequences showing the
//! pair (kernel, image) has no continuous extension.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::detvar::{DetPresentation, PolyMatrix};
use crate::ideal::{dimension_of, GroebnerLimits, IdealError};
use crate::linalg::{LinalgError, QMatrix, QSubspace};
use crate::poly::{rat, PolyError, Polynomial, Rational, VarSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid spec (m, n, t) = ({m}, {n}, {t})")]
    InvalidSpec { m: usize, n: usize, t: usize },
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("could not sample a rank {0} matrix")]
    RankRetries(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelSpec {
    pub m: usize,
    pub n: usize,
    pub t: usize,
}

impl ModelSpec {
    pub fn new(m: usize, n: usize, t: usize) -> Result<Self, ModelError> {
        if t == 0 || t > m.min(n) {
            return Err(ModelError::InvalidSpec { m, n, t });
        }
        Ok(ModelSpec { m, n, t })
    }

    /// `d = mn - (m-t+1)(n-t+1)`, the dimension of `M_t`.
    pub fn d(&self) -> usize {
        self.m * self.n - (self.m - self.t + 1) * (self.n - self.t + 1)
    }

    fn check_matrix(&self, a: &QMatrix) -> Result<(), ModelError> {
        if a.rows() != self.m || a.cols() != self.n {
            return Err(ModelError::Shape(format!(
                "expected {}x{}, got {}x{}",
                self.m,
                self.n,
                a.rows(),
                a.cols()
            )));
        }
        Ok(())
    }

    fn check_v(&self, v: &QSubspace) -> Result<(), ModelError> {
        if v.ambient() != self.n || v.dim() != self.n - self.t + 1 {
            return Err(ModelError::Shape(format!(
                "V must be a {}-plane in Q^{}, got a {}-plane in Q^{}",
                self.n - self.t + 1,
                self.n,
                v.dim(),
                v.ambient()
            )));
        }
        Ok(())
    }

    fn check_w(&self, w: &QSubspace) -> Result<(), ModelError> {
        if w.ambient() != self.m || w.dim() != self.t - 1 {
            return Err(ModelError::Shape(format!(
                "W must be a {}-plane in Q^{}, got a {}-plane in Q^{}",
                self.t - 1,
                self.m,
                w.dim(),
                w.ambient()
            )));
        }
        Ok(())
    }
}

/// The generic `m × n` matrix of variables `x{i}_{j}` with rank bound `t`.
pub fn generic_presentation(spec: &ModelSpec) -> Result<DetPresentation, ModelError> {
    let names: Vec<String> = (1..=spec.m)
        .flat_map(|i| (1..=spec.n).map(move |j| format!("x{i}_{j}")))
        .collect();
    let vars = VarSet::new(names)?;
    let entries = (0..vars.len()).map(|k| Polynomial::var(&vars, k)).collect();
    let matrix = PolyMatrix::new(&vars, spec.m, spec.n, entries)
        .map_err(|e| ModelError::Shape(e.to_string()))?;
    DetPresentation::new(
        matrix,
        spec.t,
        format!("generic {}x{} rank < {}", spec.m, spec.n, spec.t),
    )
    .map_err(|e| ModelError::Shape(e.to_string()))
}

fn random_int(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random_range(-9..=9))
}

fn random_int_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> QMatrix {
    let data = (0..rows)
        .map(|_| (0..cols).map(|_| random_int(rng)).collect())
        .collect();
    QMatrix::from_rows(data).expect("rectangular")
}

/// Product of random `m × r` and `r × n` integer matrices, resampled until
/// the rank is exactly `r`.
pub fn random_rank_matrix(
    spec: &ModelSpec,
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<QMatrix, ModelError> {
    if r > spec.m.min(spec.n) {
        return Err(ModelError::Precondition(format!(
            "rank {r} exceeds min(m, n)"
        )));
    }
    if r == 0 {
        return Ok(QMatrix::zeros(spec.m, spec.n));
    }
    for _ in 0..100 {
        let a = &random_int_matrix(spec.m, r, rng) * &random_int_matrix(r, spec.n, rng);
        if a.rank() == r {
            return Ok(a);
        }
    }
    Err(ModelError::RankRetries(r))
}

pub fn random_rank_matrix_seeded(
    spec: &ModelSpec,
    r: usize,
    seed: u64,
) -> Result<QMatrix, ModelError> {
    random_rank_matrix(spec, r, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A random `dim`-dimensional subspace of `host`.
fn random_subspace_of(host: &QSubspace, dim: usize, rng: &mut ChaCha8Rng) -> QSubspace {
    assert!(dim <= host.dim(), "subspace larger than its host");
    let mut s = QSubspace::zero(host.ambient());
    while s.dim() < dim {
        let coeffs: Vec<Rational> = (0..host.dim()).map(|_| random_int(rng)).collect();
        let mut v = vec![Rational::zero(); host.ambient()];
        for (c, b) in coeffs.iter().zip(host.basis()) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        let mut vecs = s.basis().to_vec();
        vecs.push(v);
        s = QSubspace::span(host.ambient(), &vecs);
    }
    s
}

/// A random `dim`-dimensional subspace containing `inner`.
fn random_superspace(inner: &QSubspace, dim: usize, rng: &mut ChaCha8Rng) -> QSubspace {
    let mut s = inner.clone();
    while s.dim() < dim {
        let v: Vec<Rational> = (0..inner.ambient()).map(|_| random_int(rng)).collect();
        let mut vecs = s.basis().to_vec();
        vecs.push(v);
        s = QSubspace::span(inner.ambient(), &vecs);
    }
    s
}

fn image_of(a: &QMatrix, v: &QSubspace) -> Vec<Vec<Rational>> {
    v.basis().iter().map(|b| a.apply(b)).collect()
}

/// `A(V) = 0`.
pub fn in_tjur_fiber(spec: &ModelSpec, a: &QMatrix, v: &QSubspace) -> Result<bool, ModelError> {
    spec.check_matrix(a)?;
    spec.check_v(v)?;
    Ok(image_of(a, v).iter().all(|x| x.iter().all(Zero::is_zero)))
}

/// `Im A ⊆ W`.
pub fn in_tjur_transpose_fiber(
    spec: &ModelSpec,
    a: &QMatrix,
    w: &QSubspace,
) -> Result<bool, ModelError> {
    spec.check_matrix(a)?;
    spec.check_w(w)?;
    Ok(w.contains(&a.image()))
}

pub fn in_nash_fiber(
    spec: &ModelSpec,
    a: &QMatrix,
    v: &QSubspace,
    w: &QSubspace,
) -> Result<bool, ModelError> {
    Ok(in_tjur_fiber(spec, a, v)? && in_tjur_transpose_fiber(spec, a, w)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashSequence {
    /// The correction `A'` with `ker A' ⊇ V ⊕ C` and `Im A' = W'`.
    pub a_prime: QMatrix,
    /// `A + A'/i` for `i = 1..=steps`.
    pub members: Vec<QMatrix>,
}

/// Builds `A_i = A + A'/i` converging to `A` with `ker A_i = V` and
/// `Im A_i = W`.
pub fn nash_limit_sequence(
    spec: &ModelSpec,
    a: &QMatrix,
    v: &QSubspace,
    w: &QSubspace,
    steps: usize,
) -> Result<NashSequence, ModelError> {
    if !in_nash_fiber(spec, a, v, w)? {
        return Err(ModelError::Precondition(
            "(A, V, W) is not in the Nash fibre".into(),
        ));
    }
    let r = a.rank();
    if r + 1 > spec.t {
        return Err(ModelError::Precondition(format!(
            "rank A = {r} is not below t = {}",
            spec.t
        )));
    }
    let kernel = a.kernel();
    let image = a.image();
    let v_comp = v.complement_from(kernel.basis());
    let c = kernel.complement_from(QSubspace::full(spec.n).basis());
    let w_comp = image.complement_from(w.basis());
    if v_comp.len() != w_comp.len() || v.dim() + v_comp.len() + c.len() != spec.n {
        return Err(ModelError::Precondition(
            "splitting construction failed".into(),
        ));
    }
    let mut cols: Vec<Vec<Rational>> = v.basis().to_vec();
    cols.extend(v_comp.iter().cloned());
    cols.extend(c.iter().cloned());
    let p = QMatrix::from_columns(spec.n, &cols);
    let mut targets: Vec<Vec<Rational>> = vec![vec![Rational::zero(); spec.m]; v.dim()];
    targets.extend(w_comp.iter().cloned());
    targets.extend(std::iter::repeat_n(vec![Rational::zero(); spec.m], c.len()));
    let a_prime = &QMatrix::from_columns(spec.m, &targets) * &p.inverse()?;
    let members = (1..=steps)
        .map(|i| {
            let inv = Rational::new(BigInt::one(), BigInt::from(i));
            a + &a_prime.scale(&inv)
        })
        .collect();
    Ok(NashSequence { a_prime, members })
}

/// `B(ker A) ⊆ Im A`: whether `B` is tangent to `M_t` at a point of the
/// open stratum.
pub fn tangent_membership(spec: &ModelSpec, a: &QMatrix, b: &QMatrix) -> Result<bool, ModelError> {
    spec.check_matrix(a)?;
    spec.check_matrix(b)?;
    if a.rank() + 1 != spec.t {
        return Err(ModelError::Precondition(format!(
            "rank A must be t-1 = {}",
            spec.t - 1
        )));
    }
    let image = a.image();
    Ok(image_of(b, &a.kernel())
        .iter()
        .all(|x| image.contains_vector(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuityWitness {
    pub a: QMatrix,
    pub v: QSubspace,
    pub w1: QSubspace,
    pub w2: QSubspace,
    /// `(s, A_s¹, A_s²)` for each sampled `s`.
    pub samples: Vec<(i64, QMatrix, QMatrix)>,
    /// Every sample has kernel `V`, rank `t-1` and image `W₁` resp. `W₂`.
    pub samples_ok: bool,
}

impl DiscontinuityWitness {
    pub fn distinct(&self) -> bool {
        self.w1 != self.w2
    }
}

/// `A` has ones at `(k, k)` for `k < t-2`; `A_s¹` adds `1/s` at
/// `(t-1, t-1)` and `A_s²` at `(t, t-1)` (1-based). Both sequences tend to
/// `A` with kernel `V = span{e_t..e_n}` but images `W₁ ≠ W₂`.
pub fn discontinuity_witness(
    spec: &ModelSpec,
    samples: &[i64],
) -> Result<DiscontinuityWitness, ModelError> {
    let (m, n, t) = (spec.m, spec.n, spec.t);
    if t < 2 || m < t {
        return Err(ModelError::Precondition(format!(
            "witness needs t >= 2 and m >= t, got (m, n, t) = ({m}, {n}, {t})"
        )));
    }
    let mut a = QMatrix::zeros(m, n);
    for k in 0..t - 2 {
        a.set(k, k, Rational::one());
    }
    let v = QSubspace::coordinate(n, &(t - 1..n).collect::<Vec<_>>());
    let w1 = QSubspace::coordinate(m, &(0..t - 1).collect::<Vec<_>>());
    let mut w2_idx: Vec<usize> = (0..t - 2).collect();
    w2_idx.push(t - 1);
    let w2 = QSubspace::coordinate(m, &w2_idx);
    let mut out = Vec::new();
    let mut ok = true;
    for &s in samples {
        if s == 0 {
            return Err(ModelError::Precondition("sample s must be non-zero".into()));
        }
        let eps = Rational::new(BigInt::one(), BigInt::from(s));
        let mut a1 = a.clone();
        a1.set(t - 2, t - 2, eps.clone());
        let mut a2 = a.clone();
        a2.set(t - 1, t - 2, eps);
        for (mat, w) in [(&a1, &w1), (&a2, &w2)] {
            ok &= mat.rank() == t - 1 && mat.kernel() == v && &mat.image() == w;
            ok &= in_tjur_fiber(spec, mat, &v)?;
        }
        out.push((s, a1, a2));
    }
    Ok(DiscontinuityWitness {
        a,
        v,
        w1,
        w2,
        samples: out,
        samples_ok: ok,
    })
}

/// The algebraic content of `f_s(A, V, W) = (sA, V, W)` staying in the
/// Nash fibre.
pub fn retraction_check(
    spec: &ModelSpec,
    a: &QMatrix,
    v: &QSubspace,
    w: &QSubspace,
    s: &Rational,
) -> Result<bool, ModelError> {
    if !in_nash_fiber(spec, a, v, w)? {
        return Err(ModelError::Precondition(
            "(A, V, W) is not in the Nash fibre".into(),
        ));
    }
    let sa = a.scale(s);
    let kills_v = in_tjur_fiber(spec, &sa, v)?;
    let image_in_w = s.is_zero() || in_tjur_transpose_fiber(spec, &sa, w)?;
    let zero_image = a.scale(&Rational::zero()).image().dim() == 0;
    Ok(kills_v && image_in_w && zero_image)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PropertyTally {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionCheck {
    pub computed: i64,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum WitnessOutcome {
    Distinct {
        w1_dim: usize,
        w2_dim: usize,
        samples_ok: bool,
    },
    Equal,
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelCheckReport {
    pub spec: ModelSpec,
    pub seed: u64,
    pub trials: usize,
    pub properties: Vec<PropertyTally>,
    pub dimension: Option<DimensionCheck>,
    pub witness: WitnessOutcome,
}

impl ModelCheckReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
            && self
                .dimension
                .as_ref()
                .is_none_or(|d| d.computed == d.expected as i64)
            && !matches!(
                self.witness,
                WitnessOutcome::Equal
                    | WitnessOutcome::Distinct {
                        samples_ok: false,
                        ..
                    }
            )
    }

    pub fn failures(&self) -> usize {
        self.properties.iter().map(|p| p.failed).sum()
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(
        BigInt::from(rng.random_range(-9..=9)),
        BigInt::from(rng.random_range(1..=9)),
    )
}

/// A random Nash fibre point `(A, V, W)` with `rank A = r`.
fn random_fibre_point(
    spec: &ModelSpec,
    r: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(QMatrix, QSubspace, QSubspace), ModelError> {
    let a = random_rank_matrix(spec, r, rng)?;
    let v = random_subspace_of(&a.kernel(), spec.n - spec.t + 1, rng);
    let w = random_superspace(&a.image(), spec.t - 1, rng);
    Ok((a, v, w))
}

/// Runs the property suite over `trials` seeded samples; the dimension
/// formula is checked once when `check_dimension` is set.
pub fn model_check(
    spec: &ModelSpec,
    seed: u64,
    trials: usize,
    check_dimension: bool,
    limits: &GroebnerLimits,
) -> Result<ModelCheckReport, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "rank-nullity",
        "fiber-consistency",
        "nash-sequence",
        "retraction",
        "scaling",
        "tangent",
    ];
    let mut tallies: Vec<PropertyTally> = names
        .iter()
        .map(|n| PropertyTally {
            name: (*n).to_string(),
            ..Default::default()
        })
        .collect();
    let mut record = |k: usize, ok: bool| {
        if ok {
            tallies[k].passed += 1;
        } else {
            tallies[k].failed += 1;
        }
    };
    let (m, n, t) = (spec.m, spec.n, spec.t);
    for _ in 0..trials {
        let any = random_int_matrix(m, n, &mut rng);
        record(0, any.kernel().dim() + any.rank() == n);

        let r = rng.random_range(0..t);
        let a = random_rank_matrix(spec, r, &mut rng)?;
        let (v, w) = if rng.random_bool(0.5) {
            (
                random_subspace_of(&a.kernel(), n - t + 1, &mut rng),
                random_superspace(&a.image(), t - 1, &mut rng),
            )
        } else {
            (
                random_subspace_of(&QSubspace::full(n), n - t + 1, &mut rng),
                random_subspace_of(&QSubspace::full(m), t - 1, &mut rng),
            )
        };
        let lhs = in_nash_fiber(spec, &a, &v, &w)?;
        let rhs = in_tjur_fiber(spec, &a, &v)? && w.contains(&a.image());
        record(1, lhs == rhs);

        let (a, v, w) = random_fibre_point(spec, r, &mut rng)?;
        let seq = nash_limit_sequence(spec, &a, &v, &w, 3)?;
        let mut ok = seq.a_prime.rank() == t - 1 - r;
        for (i, ai) in seq.members.iter().enumerate() {
            let inv = Rational::new(BigInt::one(), BigInt::from(i + 1));
            ok &= ai.rank() == t - 1
                && ai.kernel() == v
                && ai.image() == w
                && in_nash_fiber(spec, ai, &v, &w)?
                && (ai - &a) == seq.a_prime.scale(&inv);
        }
        record(2, ok);

        let s = random_rational(&mut rng);
        record(3, retraction_check(spec, &a, &v, &w, &s)?);

        let c = random_rational(&mut rng);
        record(4, in_nash_fiber(spec, &a.scale(&c), &v, &w)?);

        let top = random_rank_matrix(spec, t - 1, &mut rng)?;
        let b = &top * &random_int_matrix(n, n, &mut rng);
        record(
            5,
            tangent_membership(spec, &top, &top)? && tangent_membership(spec, &top, &b)?,
        );
    }
    let dimension = if check_dimension {
        let p = generic_presentation(spec)?;
        let computed = dimension_of(p.vars(), &p.ideal(), limits)?;
        Some(DimensionCheck {
            computed,
            expected: spec.d(),
        })
    } else {
        None
    };
    let witness = match discontinuity_witness(spec, &[1, 2, 10]) {
        Ok(wit) if wit.distinct() => WitnessOutcome::Distinct {
            w1_dim: wit.w1.dim(),
            w2_dim: wit.w2.dim(),
            samples_ok: wit.samples_ok,
        },
        Ok(_) => WitnessOutcome::Equal,
        Err(e) => WitnessOutcome::Skipped {
            reason: e.to_string(),
        },
    };
    Ok(ModelCheckReport {
        spec: *spec,
        seed,
        trials,
        properties: tallies,
        dimension,
        witness,
    })
}
