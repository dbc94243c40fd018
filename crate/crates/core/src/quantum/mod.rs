//! States, ensembles, measurements and channels.

mod bloch;
mod families;
pub mod random;
mod sampling;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, inner, normalize_with_phase, psd_sqrt, serde_vec, ComplexMatrix, C64,
};
use crate::{tol, MAX_DIM};

pub use bloch::{bloch_from_density, density_from_bloch};
pub use families::{gu_ensemble, gu_state, two_state_ensemble, two_state_vector};
pub use sampling::{sample_run, sample_run_with_shards, PartyStats, SampleStats};

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidState("zero dimension".into()));
    }
    if d > MAX_DIM {
        return Err(Error::DimensionTooLarge(d));
    }
    Ok(())
}

/// Unit vector with its global phase fixed: the first significant amplitude
/// is real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose norm is within `tol::NORM` of one.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = crate::linalg::norm(&amps);
        if !n.is_finite() {
            return Err(Error::NonFinite);
        }
        if (n - 1.0).abs() > tol::NORM {
            return Err(Error::InvalidState(format!("norm {n} is not 1")));
        }
        Self::normalized(amps)
    }

    /// Normalises any nonzero finite vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        check_dim(amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let amps = normalize_with_phase(&amps)
            .ok_or_else(|| Error::InvalidState("zero vector".into()))?;
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// `a|0> + b|1>` for real amplitudes.
    pub fn qubit(a: f64, b: f64) -> Result<Self> {
        Self::normalized(vec![C64::new(a, 0.0), C64::new(b, 0.0)])
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// `|<self|other>|`
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amps)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.projector(),
        }
    }

    /// The orthogonal qubit state `conj(b)|0> - conj(a)|1>` (phase normalised).
    pub fn orthogonal_qubit(&self) -> Result<PureState> {
        if self.dim() != 2 {
            return Err(Error::NotQubit(self.dim()));
        }
        PureState::normalized(vec![self.amps[1].conj(), -self.amps[0].conj()])
    }

}

impl AsRef<[C64]> for PureState {
    fn as_ref(&self) -> &[C64] {
        &self.amps
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_vec::serialize(&self.amps, s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    /// Input already in canonical form is kept bit for bit, so serialized
    /// states read back unchanged.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let amps: Vec<C64> = serde_vec::deserialize(d)?;
        let canonical = PureState::new(amps.clone()).map_err(serde::de::Error::custom)?;
        let same = canonical.amps.iter().zip(&amps).all(|(a, b)| (a - b).norm() <= tol::NORM);
        Ok(if same { PureState { amps } } else { canonical })
    }
}

/// Hermitian, PSD, unit-trace operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = matrix.hermitian_defect();
        if defect > tol::STRUCTURAL {
            return Err(Error::NotHermitian(defect));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = eig_hermitian(&matrix)?.min();
        if min < -tol::STRUCTURAL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `tr rho^2`
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `tr[rho A]`
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        (&self.matrix * a).trace().re
    }
}

impl TryFrom<ComplexMatrix> for DensityOperator {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<DensityOperator> for ComplexMatrix {
    fn from(d: DensityOperator) -> Self {
        d.matrix
    }
}

/// Prior probabilities `q_x` with states `rho_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleWire")]
pub struct Ensemble {
    label: String,
    priors: Vec<f64>,
    states: Vec<DensityOperator>,
}

#[derive(Deserialize)]
struct EnsembleWire {
    label: String,
    priors: Vec<f64>,
    states: Vec<DensityOperator>,
}

impl TryFrom<EnsembleWire> for Ensemble {
    type Error = Error;
    fn try_from(w: EnsembleWire) -> Result<Self> {
        Ensemble::new(w.label, w.priors, w.states)
    }
}

impl Ensemble {
    pub fn new(
        label: impl Into<String>,
        priors: Vec<f64>,
        states: Vec<DensityOperator>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidState("empty ensemble".into()));
        }
        if priors.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                actual: priors.len(),
            });
        }
        if priors.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(crate::error::out_of_range("priors", "each prior must lie in [0, 1]"));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > tol::NORM {
            return Err(crate::error::out_of_range(
                "priors",
                format!("priors sum to {total}, not 1"),
            ));
        }
        let d = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.dim(),
            });
        }
        Ok(Self {
            label: label.into(),
            priors,
            states,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `sum_x q_x rho_x`
    pub fn average(&self) -> DensityOperator {
        let m = self
            .priors
            .iter()
            .zip(&self.states)
            .map(|(&q, s)| s.matrix().scale(q))
            .sum();
        DensityOperator { matrix: m }
    }

    /// `q_x rho_x` for conclusive label `x` (1-based).
    pub(crate) fn weighted_state(&self, label: usize) -> ComplexMatrix {
        self.states[label - 1].matrix().scale(self.priors[label - 1])
    }
}

/// Measurement with outcome `0` reserved for the inconclusive element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank_one: Option<Vec<RankOneView>>,
}

/// `M_x = weight |direction><direction|`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneView {
    pub weight: f64,
    pub direction: PureState,
}

/// Completeness and positivity of a [`Povm`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmReport {
    /// Max-abs entry of `sum_i M_i - I`.
    pub completeness_defect: f64,
    pub min_eigenvalues: Vec<f64>,
    pub pass: bool,
}

impl Povm {
    /// Builds a POVM and rejects it unless [`validate_povm`] passes.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let povm = Self::new_unchecked(elements);
        let report = validate_povm(&povm);
        if !report.pass {
            let min = report.min_eigenvalues.iter().copied().fold(0.0, f64::min);
            if min < -tol::STRUCTURAL {
                return Err(Error::NotPsd(min));
            }
            return Err(Error::IncompleteChannel {
                defect: report.completeness_defect,
            });
        }
        Ok(povm)
    }

    /// Container without validation, for reporting on candidate measurements.
    pub fn new_unchecked(elements: Vec<ComplexMatrix>) -> Self {
        Self {
            elements,
            rank_one: None,
        }
    }

    /// Attaches the rank-one description of conclusive outcomes `1..=n`.
    pub fn with_rank_one_views(mut self, views: Vec<RankOneView>) -> Self {
        self.rank_one = Some(views);
        self
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, outcome: usize) -> &ComplexMatrix {
        &self.elements[outcome]
    }

    pub fn rank_one_views(&self) -> Option<&[RankOneView]> {
        self.rank_one.as_deref()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Square-root Kraus realisation `K_i = sqrt(M_i)`.
    pub fn sqrt_instrument(&self) -> Result<KrausChannel> {
        let ops = self
            .elements
            .iter()
            .map(psd_sqrt)
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(ops)
    }
}

/// Report-style POVM check: completeness within `tol::STRUCTURAL` and every
/// element PSD within `-tol::STRUCTURAL`. Rank-one views, when attached, must
/// reproduce their elements.
pub fn validate_povm(povm: &Povm) -> PovmReport {
    if povm.elements.is_empty() {
        return PovmReport {
            completeness_defect: f64::INFINITY,
            min_eigenvalues: Vec::new(),
            pass: false,
        };
    }
    let d = povm.dim();
    let total: ComplexMatrix = povm.elements.iter().cloned().sum();
    let completeness_defect = total.max_abs_diff(&ComplexMatrix::identity(d));
    let min_eigenvalues: Vec<f64> = povm
        .elements
        .iter()
        .map(|m| match eig_hermitian(m) {
            Ok(s) => s.min(),
            Err(_) => f64::NEG_INFINITY,
        })
        .collect();
    let views_ok = povm.rank_one.as_ref().is_none_or(|views| {
        views.len() + 1 == povm.elements.len()
            && views.iter().enumerate().all(|(i, v)| {
                v.direction
                    .projector()
                    .scale(v.weight)
                    .max_abs_diff(&povm.elements[i + 1])
                    <= tol::STRUCTURAL
            })
    });
    let pass = completeness_defect <= tol::STRUCTURAL
        && min_eigenvalues.iter().all(|&v| v >= -tol::STRUCTURAL)
        && views_ok;
    PovmReport {
        completeness_defect,
        min_eigenvalues,
        pass,
    }
}

/// Channel `rho -> sum_i K_i rho K_i^dag`; operator `i` belongs to outcome `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KrausWire")]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct KrausWire {
    operators: Vec<ComplexMatrix>,
}

impl TryFrom<KrausWire> for KrausChannel {
    type Error = Error;
    fn try_from(w: KrausWire) -> Result<Self> {
        KrausChannel::new(w.operators)
    }
}

impl KrausChannel {
    /// Rejects operator sets whose completeness defect exceeds `tol::STRUCTURAL`.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidState("channel without operators".into()));
        };
        let d = first.dim();
        check_dim(d)?;
        if let Some(bad) = operators.iter().find(|k| k.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: bad.dim(),
            });
        }
        if operators.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite);
        }
        let ch = Self { operators };
        let defect = ch.completeness_defect();
        if defect > tol::STRUCTURAL {
            return Err(Error::IncompleteChannel { defect });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `rho -> tr(rho) I/d` via `K_ij = |i><j| / sqrt(d)`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        let r = 1.0 / (dim as f64).sqrt();
        let mut operators = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = ComplexMatrix::zeros(dim);
                k[(i, j)] = C64::new(r, 0.0);
                operators.push(k);
            }
        }
        Self { operators }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// Max-abs entry of `sum_i K_i^dag K_i - I`.
    pub fn completeness_defect(&self) -> f64 {
        let total: ComplexMatrix = self
            .operators
            .iter()
            .map(|k| &k.adjoint() * k)
            .sum();
        total.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// The POVM `{K_i^dag K_i}` realised by this instrument.
    pub fn povm(&self) -> Povm {
        Povm::new_unchecked(self.operators.iter().map(|k| &k.adjoint() * k).collect())
    }

    /// Applies the channel to an arbitrary operator (linear extension).
    pub fn apply_operator(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.operators.iter().map(|k| k.sandwich(a)).sum()
    }
}

/// `sum_i K_i rho K_i^dag`
pub fn apply_channel(channel: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    if channel.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            actual: rho.dim(),
        });
    }
    DensityOperator::new(channel.apply_operator(rho.matrix()))
}

/// Passes every member of `ens` through `channel`, keeping the priors.
pub fn propagate_ensemble(channel: &KrausChannel, ens: &Ensemble) -> Result<Ensemble> {
    let states = ens
        .states
        .iter()
        .map(|s| apply_channel(channel, s))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(ens.label.clone(), ens.priors.clone(), states)
}
