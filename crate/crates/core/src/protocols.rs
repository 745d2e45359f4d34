//! The teleportation protocols.
//!
//! Three particles throughout: particle 1 carries the unknown input `(a,b)`,
//! particles 2 and 3 are the shared channel `α|↑↑⟩ + β|↓↓⟩` with Alice
//! holding 2 and Bob holding 3. Expanding the joint state over the Bell
//! basis of particles (1,2) gives the four conditional Bob states
//!
//! ```text
//! Φ₊ → (αa, βb)    Φ₋ → (αa, −βb)    Ψ₊ → (αb, βa)    Ψ₋ → (αb, −βa)
//! ```
//!
//! (unnormalized). On a maximally entangled channel the α, β dependence
//! drops out and a fixed Pauli rotation per outcome restores the input —
//! standard teleportation, two classical bits.
//!
//! On a partially entangled channel those rotations no longer suffice.
//! Splitting the Bell measurement into (1) a parallel/antiparallel subspace
//! check and (2) an unambiguous discrimination of `(α,β)` vs `(α,−β)` inside
//! the branch subspace removes the α, β dependence exactly: whenever the
//! discrimination concludes, Bob's state collapses onto one of `(a,b)`,
//! `(a,−b)`, `(b,a)`, `(b,−a)` and the same four Pauli corrections finish
//! the job with fidelity one. The price is an inconclusive outcome with
//! probability `α² − β²` — conclusive teleportation.
//!
//! Every sampling entry point is a thin layer over a deterministic
//! enumeration of the full outcome tree ([`standard_teleport_branches`],
//! [`conclusive_teleport_branches`], [`one_bit_teleport_branches`]), which
//! carries exact probabilities and is what the verification suites consume.

use num_complex::Complex64;
use rand::Rng;

use crate::discrimination::{usd_povm, UsdSetup};
use crate::ensembles::generate_at_distance;
use crate::measure::{
    bell_basis, bell_states, induced_povm, sample_index, telepovm_elements, Povm, BELL_LABELS,
};
use crate::qcore::{fidelity, DensityMatrix, Operator, StateVector};
use crate::tol;
use crate::{Error, Result};

/// A Schmidt-ordered pure entangled channel `α|↑↑⟩ + β|↓↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    alpha: f64,
    beta: f64,
}

impl ChannelSpec {
    /// Requires `α ≥ β ≥ 0` and `α² + β² = 1`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= beta && beta >= 0.0) {
            return Err(Error::SchmidtOrderViolated { alpha, beta });
        }
        let norm_sq = alpha * alpha + beta * beta;
        if (norm_sq - 1.0).abs() > tol::NORM {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { alpha, beta })
    }

    /// Builds from the larger Schmidt weight α²; values below ½ are mapped
    /// to their Schmidt-ordered mirror `1 − α²`.
    pub fn from_alpha_squared(alpha_sq: f64) -> Result<Self> {
        if !(alpha_sq > 0.0 && alpha_sq <= 1.0) || !alpha_sq.is_finite() {
            return Err(Error::SchmidtOrderViolated {
                alpha: alpha_sq,
                beta: 1.0 - alpha_sq,
            });
        }
        let big = alpha_sq.max(1.0 - alpha_sq);
        Self::new(big.sqrt(), (1.0 - big).sqrt())
    }

    pub fn maximally_entangled() -> Self {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: inv,
            beta: inv,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `s = α² − β²`, the overlap of the two branch states fed to the
    /// discriminator; also the inconclusive probability.
    pub fn branch_overlap(&self) -> f64 {
        self.alpha * self.alpha - self.beta * self.beta
    }

    /// The channel ket on labels `"2"` (Alice) and `"3"` (Bob).
    pub fn state(&self) -> StateVector {
        StateVector::new(
            vec![
                Complex64::new(self.alpha, 0.0),
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::new(self.beta, 0.0),
            ],
            vec![2, 2],
            vec!["2", "3"],
        )
        .expect("normalized by construction")
    }

    /// Bob's reduced state `diag(α², β²)` — what he holds unconditionally,
    /// whatever Alice does.
    pub fn reduced_bob(&self) -> DensityMatrix {
        DensityMatrix::new(Operator::from_real(&[
            &[self.alpha * self.alpha, 0.0],
            &[0.0, self.beta * self.beta],
        ]))
        .expect("valid diagonal density matrix")
    }
}

/// The Pauli rotations Bob may be asked to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionLabel {
    Identity,
    PauliX,
    PauliZ,
    PauliXZ,
}

impl CorrectionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorrectionLabel::Identity => "I",
            CorrectionLabel::PauliX => "X",
            CorrectionLabel::PauliZ => "Z",
            CorrectionLabel::PauliXZ => "XZ",
        }
    }
}

/// A labeled single-qubit unitary correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub label: CorrectionLabel,
    pub operator: Operator,
}

impl Correction {
    fn from_label(label: CorrectionLabel) -> Self {
        let operator = match label {
            CorrectionLabel::Identity => Operator::identity(2),
            CorrectionLabel::PauliX => Operator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]),
            CorrectionLabel::PauliZ => Operator::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]),
            // X·Z, i.e. Z first, then X
            CorrectionLabel::PauliXZ => Operator::from_real(&[&[0.0, -1.0], &[1.0, 0.0]]),
        };
        Self { label, operator }
    }

    /// Applies the correction to a single-qubit state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let amps = self.operator.apply(state.amplitudes())?;
        StateVector::new(amps, state.dims().to_vec(), state.labels().to_vec())
    }
}

/// The fixed correction for each Bell outcome of the teleportation
/// measurement: `Φ₊ → I`, `Φ₋ → Z`, `Ψ₊ → X`, `Ψ₋ → XZ`.
///
/// Derived once from the Bell expansion above and independent of the input
/// state; the correction-table universality test re-derives it on random
/// inputs.
pub fn correction_for(bell_outcome: &str) -> Result<Correction> {
    let label = match bell_outcome {
        "Phi+" => CorrectionLabel::Identity,
        "Phi-" => CorrectionLabel::PauliZ,
        "Psi+" => CorrectionLabel::PauliX,
        "Psi-" => CorrectionLabel::PauliXZ,
        other => return Err(Error::UnknownOutcome(other.to_string())),
    };
    Ok(Correction::from_label(label))
}

/// The fixed recovery rotations for the singlet + telepovm demonstration,
/// keyed by POVM outcome index: they map Bob's conditional states
/// `(s,−c), (s,c), (c,−s), (c,s)` back to `(c,s)` for every θ.
pub fn telepovm_recovery_correction(outcome: usize) -> Result<Correction> {
    let label = match outcome {
        0 => CorrectionLabel::PauliXZ,
        1 => CorrectionLabel::PauliX,
        2 => CorrectionLabel::PauliZ,
        3 => CorrectionLabel::Identity,
        _ => return Err(Error::UnknownOutcome(format!("A{}", outcome + 1))),
    };
    Ok(Correction::from_label(label))
}

/// One labeled measurement step inside a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub step: &'static str,
    pub outcome: String,
}

/// Full record of one protocol run.
///
/// `conclusive` marks *certified exact delivery*: the sender knows the
/// transfer worked and flags it. Standard teleportation has no such
/// certification step, so its transcripts always carry `conclusive = false`
/// even though Bob always receives a state.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub protocol: &'static str,
    pub input: StateVector,
    pub channel: ChannelSpec,
    pub step_outcomes: Vec<StepOutcome>,
    pub classical_bits_sent: u8,
    pub conclusive: bool,
    pub correction: Option<Correction>,
    pub bob_final: Option<StateVector>,
    pub fidelity_achieved: Option<f64>,
}

/// One leaf of the deterministic outcome tree: its exact probability, the
/// transcript it produces, and Bob's reduced state *before* the classical
/// message arrives (used by the no-signaling check).
#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub transcript: Transcript,
    pub bob_premessage: Option<DensityMatrix>,
}

/// Sum of branch probabilities; exactly 1 for a complete enumeration.
pub fn total_probability(branches: &[Branch]) -> f64 {
    branches.iter().map(|b| b.probability).sum()
}

/// Probability-weighted average of Bob's pre-message reduced states. By
/// no-signaling this equals the channel's reduced state no matter what
/// Alice's input or protocol is.
pub fn premessage_average(branches: &[Branch]) -> Result<DensityMatrix> {
    let mut sum = Operator::zeros(2);
    for branch in branches {
        if let Some(rho) = &branch.bob_premessage {
            sum = sum.add(&rho.op().scale(Complex64::new(branch.probability, 0.0)))?;
        }
    }
    DensityMatrix::from_unnormalized(sum)
}

const STANDARD: &str = "standard";
const CONCLUSIVE: &str = "conclusive";
const ONE_BIT_SINGLET: &str = "one-bit-singlet";
const ONE_BIT_CONCLUSIVE: &str = "one-bit-conclusive";

/// `input ⊗ channel` on labels 1, 2, 3. The caller's label on the input is
/// replaced by `"1"`.
pub fn three_particle_state(input: &StateVector, channel: &ChannelSpec) -> Result<StateVector> {
    if input.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: input.dim(),
        });
    }
    let input = input.clone().relabel(vec!["1"])?;
    input.tensor(&channel.state())
}

/// `result[j] = Σ_I conj(bra[I]) ψ[I·d_rest + j]` — projects the leading
/// block onto a ket and leaves the trailing factor.
fn contract_front_bra(psi: &[Complex64], bra: &[Complex64], d_rest: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; d_rest];
    for (block, coeff) in bra.iter().enumerate() {
        if *coeff == Complex64::ZERO {
            continue;
        }
        let conj = coeff.conj();
        for (j, slot) in out.iter_mut().enumerate() {
            *slot += conj * psi[block * d_rest + j];
        }
    }
    out
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn bob_state(amps: Vec<Complex64>) -> Option<StateVector> {
    StateVector::normalized(amps, vec![2], vec!["3".to_string()])
}

/// Bell-measurement outcome data on particles (1,2): for each Bell state,
/// the branch probability and Bob's conditional (pre-correction) state.
fn bell_branches(psi123: &StateVector) -> Vec<(usize, f64, Option<StateVector>)> {
    bell_states()
        .iter()
        .enumerate()
        .map(|(k, bell)| {
            let contracted = contract_front_bra(psi123.amplitudes(), bell.amplitudes(), 2);
            let probability = norm_sq(&contracted);
            let state = bob_state(contracted);
            (k, probability, state)
        })
        .collect()
}

fn standard_transcript(
    input: &StateVector,
    channel: &ChannelSpec,
    outcome_index: usize,
    premeasured: &Option<StateVector>,
) -> Result<Transcript> {
    let label = BELL_LABELS[outcome_index];
    let (correction, bob_final, fidelity_achieved) = match premeasured {
        Some(pre) => {
            let correction = correction_for(label)?;
            let corrected = correction.apply(pre)?;
            let f = fidelity(input, &corrected)?;
            (Some(correction), Some(corrected), Some(f))
        }
        None => (None, None, None),
    };
    Ok(Transcript {
        protocol: STANDARD,
        input: input.clone(),
        channel: *channel,
        step_outcomes: vec![StepOutcome {
            step: "bell",
            outcome: label.to_string(),
        }],
        classical_bits_sent: 2,
        conclusive: false,
        correction,
        bob_final,
        fidelity_achieved,
    })
}

/// Enumerates all four Bell branches of standard teleportation exactly.
pub fn standard_teleport_branches(
    input: &StateVector,
    channel: &ChannelSpec,
) -> Result<Vec<Branch>> {
    let input = input.clone().relabel(vec!["1"])?;
    let psi123 = three_particle_state(&input, channel)?;
    bell_branches(&psi123)
        .into_iter()
        .map(|(k, probability, pre)| {
            let transcript = standard_transcript(&input, channel, k, &pre)?;
            let bob_premessage = pre.as_ref().map(DensityMatrix::from_pure);
            Ok(Branch {
                probability,
                transcript,
                bob_premessage,
            })
        })
        .collect()
}

/// Runs standard teleportation once: Alice Bell-measures particles (1,2),
/// sends two bits, Bob applies the fixed Pauli correction. Exact on a
/// maximally entangled channel; fidelity generally below one otherwise.
pub fn standard_teleport<R: Rng + ?Sized>(
    input: &StateVector,
    channel: &ChannelSpec,
    rng: &mut R,
) -> Result<Transcript> {
    let branches = standard_teleport_branches(input, channel)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let index = sample_index(&probs, rng)?;
    Ok(branches
        .into_iter()
        .nth(index)
        .expect("sampled index")
        .transcript)
}

/// Equivalence data for one angle: the Bell-measurement-with-ancilla POVM
/// against the closed-form elements, plus the full remote-recovery chain on
/// a singlet.
#[derive(Debug, Clone)]
pub struct TelepovmEquivalence {
    pub theta: f64,
    /// `max |induced − direct|` over all four elements, entrywise.
    pub max_element_deviation: f64,
    /// Outcome probabilities of the POVM on Alice's half of a singlet.
    pub outcome_probabilities: Vec<f64>,
    /// Fidelity of each corrected conditional state against `(cos θ, sin θ)`.
    pub recovery_fidelities: Vec<f64>,
}

impl TelepovmEquivalence {
    pub fn passes(&self) -> bool {
        self.max_element_deviation < 1e-12
            && self
                .recovery_fidelities
                .iter()
                .all(|&f| f >= 1.0 - tol::RECONSTRUCTION)
    }
}

/// Checks the full telepovm chain at one angle: (1) contracting the Bell
/// projectors against the ancilla `(cos θ, sin θ)` reproduces the four
/// closed-form elements; (2) measuring that POVM on half a singlet leaves
/// Bob states that the four fixed rotations map back to the ancilla state.
pub fn verify_telepovm_equivalence(theta: f64) -> Result<TelepovmEquivalence> {
    let ancilla = StateVector::qubit_xz(theta);
    let induced = induced_povm(&bell_basis(), &DensityMatrix::from_pure(&ancilla))?;
    let direct = telepovm_elements(theta);
    let mut max_element_deviation: f64 = 0.0;
    for (a, b) in induced.elements().iter().zip(direct.elements()) {
        max_element_deviation = max_element_deviation.max(a.max_abs_diff(b)?);
    }

    let ensemble = generate_at_distance(&StateVector::singlet(), &direct)?;
    let mut outcome_probabilities = Vec::with_capacity(4);
    let mut recovery_fidelities = Vec::with_capacity(4);
    for (i, member) in ensemble.members.iter().enumerate() {
        outcome_probabilities.push(member.probability);
        let state = member
            .state
            .as_pure()
            .ok_or_else(|| Error::UnknownOutcome(format!("null outcome A{}", i + 1)))?;
        let corrected = telepovm_recovery_correction(i)?.apply(state)?;
        recovery_fidelities.push(fidelity(&ancilla, &corrected)?);
    }

    Ok(TelepovmEquivalence {
        theta,
        max_element_deviation,
        outcome_probabilities,
        recovery_fidelities,
    })
}

/// First stage of the split Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceBranch {
    /// Particles (1,2) found in span{|↑↑⟩, |↓↓⟩}.
    Parallel,
    /// Particles (1,2) found in span{|↑↓⟩, |↓↑⟩}.
    Antiparallel,
}

impl SubspaceBranch {
    pub fn label(&self) -> &'static str {
        match self {
            SubspaceBranch::Parallel => "parallel",
            SubspaceBranch::Antiparallel => "antiparallel",
        }
    }

    /// Flat (1,2)-indices spanning the branch, in branch-basis order.
    ///
    /// The antiparallel basis is ordered (|↓↑⟩, |↑↓⟩) so that the two-qubit
    /// factor entangled with Bob reads exactly `(α, ±β)` in branch
    /// coordinates; this is what fixes the usd-outcome → correction map.
    fn basis_indices(&self) -> [usize; 2] {
        match self {
            SubspaceBranch::Parallel => [0, 3],
            SubspaceBranch::Antiparallel => [2, 1],
        }
    }
}

/// Both outcomes of the subspace check, with renormalized post states.
///
/// For `Ψ₁₂₃ = (a,b) ⊗ (α|↑↑⟩+β|↓↓⟩)` the probabilities are
/// `p∥ = α²|a|² + β²|b|²` and `p∦ = β²|a|² + α²|b|²`; they are both ½ when
/// the channel is maximally entangled or the input has `|a| = |b|`.
pub fn subspace_projection_outcomes(
    psi123: &StateVector,
) -> Result<Vec<(SubspaceBranch, f64, Option<StateVector>)>> {
    if psi123.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            actual: psi123.dim(),
        });
    }
    let mut out = Vec::with_capacity(2);
    for branch in [SubspaceBranch::Parallel, SubspaceBranch::Antiparallel] {
        let keep = branch.basis_indices();
        let amps: Vec<Complex64> = (0..8)
            .map(|i| {
                let block = i / 2;
                if keep.contains(&block) {
                    psi123.amplitude(i)
                } else {
                    Complex64::ZERO
                }
            })
            .collect();
        let probability = norm_sq(&amps);
        let post = StateVector::normalized(amps, psi123.dims().to_vec(), psi123.labels().to_vec());
        out.push((branch, probability, post));
    }
    Ok(out)
}

/// Samples the subspace check, consuming one uniform variate.
pub fn subspace_projection_step<R: Rng + ?Sized>(
    psi123: &StateVector,
    rng: &mut R,
) -> Result<(SubspaceBranch, StateVector, f64)> {
    let outcomes = subspace_projection_outcomes(psi123)?;
    let probs: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let index = sample_index(&probs, rng)?;
    let (branch, probability, post) = outcomes.into_iter().nth(index).expect("sampled index");
    let post = post.ok_or(Error::CorruptMeasurement {
        floor: tol::PROB_FLOOR,
    })?;
    Ok((branch, post, probability))
}

/// Precomputed discrimination data for one channel: the USD setup on branch
/// coordinates plus the rank-1 contraction vectors of the conclusive
/// effects, embedded in the (1,2) index space of each branch.
struct ConclusiveKernel {
    /// 1/(1+s), the eigenvalue of each conclusive effect.
    effect_weight: f64,
    setup: UsdSetup,
}

impl ConclusiveKernel {
    fn new(channel: &ChannelSpec) -> Result<Self> {
        if channel.beta() <= 0.0 {
            return Err(Error::ProductChannel);
        }
        let u = StateVector::qubit(
            Complex64::new(channel.alpha(), 0.0),
            Complex64::new(channel.beta(), 0.0),
        )?;
        let v = StateVector::qubit(
            Complex64::new(channel.alpha(), 0.0),
            Complex64::new(-channel.beta(), 0.0),
        )?;
        let setup = usd_povm(&u, &v)?;
        Ok(Self {
            effect_weight: 1.0 / (1.0 + setup.overlap),
            setup,
        })
    }

    /// Support ket of the conclusive effect for `outcome` (0 = u, 1 = v) in
    /// branch coordinates: `|v⊥⟩` and `|u⊥⟩` respectively.
    fn effect_support(&self, outcome: usize) -> [Complex64; 2] {
        let source = if outcome == 0 {
            &self.setup.v
        } else {
            &self.setup.u
        };
        // (x₀, x₁)⊥ = (−x̄₁, x̄₀)
        [-source.amplitude(1).conj(), source.amplitude(0).conj()]
    }

    /// The same support ket written over the four (1,2) indices of `branch`.
    fn embedded_support(&self, branch: SubspaceBranch, outcome: usize) -> Vec<Complex64> {
        let coords = self.effect_support(outcome);
        let idx = branch.basis_indices();
        let mut w = vec![Complex64::ZERO; 4];
        w[idx[0]] = coords[0];
        w[idx[1]] = coords[1];
        w
    }
}

/// The three-outcome POVM that the second (discrimination) step applies to
/// particles (1,2) inside one branch: the two conclusive effects, and an
/// inconclusive element completed with the orthogonal-subspace projector so
/// the set sums to identity on the full four-dimensional space.
pub fn branch_usd_povm(channel: &ChannelSpec, branch: SubspaceBranch) -> Result<Povm> {
    let kernel = ConclusiveKernel::new(channel)?;
    let idx = branch.basis_indices();
    let scale = Complex64::new(kernel.effect_weight, 0.0);

    let lift = |coords: [Complex64; 2]| -> Operator {
        let mut w = [Complex64::ZERO; 4];
        w[idx[0]] = coords[0];
        w[idx[1]] = coords[1];
        Operator::from_fn(4, |r, c| w[r] * w[c].conj())
    };
    let e_u = lift(kernel.effect_support(0)).scale(scale);
    let e_v = lift(kernel.effect_support(1)).scale(scale);

    // branch projector = |e0⟩⟨e0| + |e1⟩⟨e1|
    let mut p_branch = Operator::zeros(4);
    for &i in &idx {
        p_branch.set(i, i, Complex64::ONE);
    }
    let complement = Operator::identity(4).sub(&p_branch)?;
    let e_inc = p_branch.sub(&e_u)?.sub(&e_v)?.add(&complement)?;
    Povm::new(vec![e_u, e_v, e_inc], vec!["u", "v", "inconclusive"])
}

const USD_LABELS: [&str; 3] = ["u", "v", "inconclusive"];

fn conclusive_correction(branch: SubspaceBranch, usd_outcome: usize) -> Correction {
    // (parallel, u) → Bob holds (a,b); (parallel, v) → (a,−b);
    // (antiparallel, u) → (b,a); (antiparallel, v) → (b,−a).
    let label = match (branch, usd_outcome) {
        (SubspaceBranch::Parallel, 0) => CorrectionLabel::Identity,
        (SubspaceBranch::Parallel, 1) => CorrectionLabel::PauliZ,
        (SubspaceBranch::Antiparallel, 0) => CorrectionLabel::PauliX,
        _ => CorrectionLabel::PauliXZ,
    };
    Correction::from_label(label)
}

struct UsdLeaf {
    usd_outcome: usize,
    conditional_probability: f64,
    bob_pure: Option<StateVector>,
    bob_reduced: Option<Operator>,
}

/// All three discrimination outcomes inside one (normalized) branch state:
/// conditional probabilities, Bob's exact conditional ket for the
/// conclusive outcomes, and his unnormalized reduced matrix otherwise.
fn usd_leaves(
    kernel: &ConclusiveKernel,
    branch: SubspaceBranch,
    post: &StateVector,
) -> Vec<UsdLeaf> {
    let mut leaves = Vec::with_capacity(3);
    let mut conclusive_total = 0.0;
    for outcome in 0..2 {
        let w = kernel.embedded_support(branch, outcome);
        let contracted = contract_front_bra(post.amplitudes(), &w, 2);
        let probability = norm_sq(&contracted) * kernel.effect_weight;
        conclusive_total += probability;
        leaves.push(UsdLeaf {
            usd_outcome: outcome,
            conditional_probability: probability,
            bob_pure: bob_state(contracted),
            bob_reduced: None,
        });
    }
    // Inconclusive: probability by completeness; reduced state by direct
    // contraction of the remaining effect against |post⟩⟨post|.
    let p_inc = (1.0 - conclusive_total).max(0.0);
    let bob_reduced = if p_inc > tol::PROB_FLOOR {
        Some(inconclusive_reduced(kernel, branch, post))
    } else {
        None
    };
    leaves.push(UsdLeaf {
        usd_outcome: 2,
        conditional_probability: p_inc,
        bob_pure: None,
        bob_reduced,
    });
    leaves
}

/// `Tr₁₂[(E_? ⊗ I)|ψ⟩⟨ψ|]`, unnormalized. Because the effect acts only on
/// the traced factor, no Kraus factor is needed for the reduced state.
fn inconclusive_reduced(
    kernel: &ConclusiveKernel,
    branch: SubspaceBranch,
    post: &StateVector,
) -> Operator {
    // E_? = P_branch − E_u − E_v on the branch; the orthogonal complement
    // never sees a branch-supported state.
    let idx = branch.basis_indices();
    let amp = |i12: usize, j: usize| post.amplitude(i12 * 2 + j);
    let mut rho = Operator::zeros(2);
    // P_branch part: Σ_{i∈branch} ψ[i,j] conj(ψ[i,l])
    for j in 0..2 {
        for l in 0..2 {
            let mut sum = Complex64::ZERO;
            for &i in &idx {
                sum += amp(i, j) * amp(i, l).conj();
            }
            rho.set(j, l, sum);
        }
    }
    // minus the rank-1 conclusive effects
    for outcome in 0..2 {
        let w = kernel.embedded_support(branch, outcome);
        let contracted = contract_front_bra(post.amplitudes(), &w, 2);
        for j in 0..2 {
            for l in 0..2 {
                let sub = contracted[j] * contracted[l].conj() * kernel.effect_weight;
                rho.set(j, l, rho.get(j, l) - sub);
            }
        }
    }
    rho
}

fn conclusive_transcript(
    protocol: &'static str,
    input: &StateVector,
    channel: &ChannelSpec,
    branch: SubspaceBranch,
    leaf: &UsdLeaf,
    success: bool,
    bits: u8,
) -> Result<Transcript> {
    let steps = vec![
        StepOutcome {
            step: "subspace",
            outcome: branch.label().to_string(),
        },
        StepOutcome {
            step: "usd",
            outcome: USD_LABELS[leaf.usd_outcome].to_string(),
        },
    ];
    let (correction, bob_final, fidelity_achieved) = if success {
        match &leaf.bob_pure {
            Some(pre) => {
                let correction = conclusive_correction(branch, leaf.usd_outcome);
                let corrected = correction.apply(pre)?;
                let f = fidelity(input, &corrected)?;
                (Some(correction), Some(corrected), Some(f))
            }
            None => (None, None, None),
        }
    } else {
        (None, None, None)
    };
    Ok(Transcript {
        protocol,
        input: input.clone(),
        channel: *channel,
        step_outcomes: steps,
        classical_bits_sent: bits,
        conclusive: success && bob_final.is_some(),
        correction,
        bob_final,
        fidelity_achieved,
    })
}

fn conclusive_branches_impl(
    protocol: &'static str,
    input: &StateVector,
    channel: &ChannelSpec,
    success_filter: impl Fn(SubspaceBranch, usize) -> bool,
    bits: u8,
) -> Result<Vec<Branch>> {
    let kernel = ConclusiveKernel::new(channel)?;
    let input = input.clone().relabel(vec!["1"])?;
    let psi123 = three_particle_state(&input, channel)?;
    let mut branches = Vec::with_capacity(6);
    for (branch, p_branch, post) in subspace_projection_outcomes(&psi123)? {
        match post {
            Some(post) => {
                for leaf in usd_leaves(&kernel, branch, &post) {
                    let probability = p_branch * leaf.conditional_probability;
                    let success = success_filter(branch, leaf.usd_outcome);
                    let transcript = conclusive_transcript(
                        protocol, &input, channel, branch, &leaf, success, bits,
                    )?;
                    let bob_premessage = match (&leaf.bob_pure, &leaf.bob_reduced) {
                        (Some(pure), _) => Some(DensityMatrix::from_pure(pure)),
                        (None, Some(reduced)) => {
                            Some(DensityMatrix::from_unnormalized(reduced.clone())?)
                        }
                        _ => None,
                    };
                    branches.push(Branch {
                        probability,
                        transcript,
                        bob_premessage,
                    });
                }
            }
            None => {
                // Dead subspace branch: keep the slot with probability zero.
                let leaf = UsdLeaf {
                    usd_outcome: 2,
                    conditional_probability: 0.0,
                    bob_pure: None,
                    bob_reduced: None,
                };
                let transcript =
                    conclusive_transcript(protocol, &input, channel, branch, &leaf, false, bits)?;
                branches.push(Branch {
                    probability: 0.0,
                    transcript,
                    bob_premessage: None,
                });
            }
        }
    }
    Ok(branches)
}

/// Enumerates all branches of conclusive teleportation: two subspace
/// outcomes × three discrimination outcomes, with exact joint probabilities.
pub fn conclusive_teleport_branches(
    input: &StateVector,
    channel: &ChannelSpec,
) -> Result<Vec<Branch>> {
    conclusive_branches_impl(CONCLUSIVE, input, channel, |_, usd| usd < 2, 3)
}

/// Runs conclusive teleportation once.
///
/// Step 1 checks whether particles (1,2) lie in the parallel or antiparallel
/// subspace; step 2 unambiguously discriminates `(α,β)` from `(α,−β)` in the
/// branch basis. A conclusive outcome collapses Bob onto one of `(a,b)`,
/// `(a,−b)`, `(b,a)`, `(b,−a)` exactly; the fixed correction then delivers
/// the input with fidelity one. Three classical bits are charged: the
/// success flag plus the two correction bits.
pub fn conclusive_teleport<R: Rng + ?Sized>(
    input: &StateVector,
    channel: &ChannelSpec,
    rng: &mut R,
) -> Result<Transcript> {
    let kernel = ConclusiveKernel::new(channel)?;
    let input = input.clone().relabel(vec!["1"])?;
    let psi123 = three_particle_state(&input, channel)?;
    let (branch, post, _) = subspace_projection_step(&psi123, rng)?;
    let leaves = usd_leaves(&kernel, branch, &post);
    let probs: Vec<f64> = leaves.iter().map(|l| l.conditional_probability).collect();
    let index = sample_index(&probs, rng)?;
    let leaf = &leaves[index];
    conclusive_transcript(
        CONCLUSIVE,
        &input,
        channel,
        branch,
        leaf,
        leaf.usd_outcome < 2,
        3,
    )
}

/// Variant selector for [`one_bit_teleport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneBitMode {
    /// Bell-measure but announce only "was it Ψ₋?". Succeeds on a quarter of
    /// the attempts of a maximally entangled channel; Bob needs no further
    /// information because the Ψ₋ correction is fixed in advance.
    SingletOnly,
    /// Run the two-step conclusive protocol but announce success only for
    /// the antiparallel-branch `v` outcome (the Ψ₋ analogue). Success
    /// probability `(1 − (α² − β²))/4`, fidelity one on success.
    ConclusiveSingletOnly,
}

/// Enumerates the one-bit protocol branches.
pub fn one_bit_teleport_branches(
    input: &StateVector,
    channel: &ChannelSpec,
    mode: OneBitMode,
) -> Result<Vec<Branch>> {
    match mode {
        OneBitMode::SingletOnly => {
            let overlap = channel.branch_overlap();
            if overlap.abs() > tol::NORM {
                return Err(Error::NotMaximallyEntangled {
                    alpha_sq: channel.alpha() * channel.alpha(),
                });
            }
            let input = input.clone().relabel(vec!["1"])?;
            let psi123 = three_particle_state(&input, channel)?;
            bell_branches(&psi123)
                .into_iter()
                .map(|(k, probability, pre)| {
                    let success = k == 3 && pre.is_some();
                    let (correction, bob_final, fidelity_achieved) = if success {
                        let pre = pre.as_ref().expect("checked");
                        let correction = correction_for("Psi-")?;
                        let corrected = correction.apply(pre)?;
                        let f = fidelity(&input, &corrected)?;
                        (Some(correction), Some(corrected), Some(f))
                    } else {
                        (None, None, None)
                    };
                    let bob_premessage = pre.as_ref().map(DensityMatrix::from_pure);
                    Ok(Branch {
                        probability,
                        transcript: Transcript {
                            protocol: ONE_BIT_SINGLET,
                            input: input.clone(),
                            channel: *channel,
                            step_outcomes: vec![StepOutcome {
                                step: "bell",
                                outcome: BELL_LABELS[k].to_string(),
                            }],
                            classical_bits_sent: 1,
                            conclusive: success,
                            correction,
                            bob_final,
                            fidelity_achieved,
                        },
                        bob_premessage,
                    })
                })
                .collect()
        }
        OneBitMode::ConclusiveSingletOnly => {
            if channel.beta() <= 0.0 {
                return product_channel_one_bit_branches(input, channel);
            }
            conclusive_branches_impl(
                ONE_BIT_CONCLUSIVE,
                input,
                channel,
                |branch, usd| branch == SubspaceBranch::Antiparallel && usd == 1,
                1,
            )
        }
    }
}

/// With β = 0 the two branch states coincide and the discriminator never
/// concludes: both subspace outcomes end inconclusive with certainty.
fn product_channel_one_bit_branches(
    input: &StateVector,
    channel: &ChannelSpec,
) -> Result<Vec<Branch>> {
    let input = input.clone().relabel(vec!["1"])?;
    let psi123 = three_particle_state(&input, channel)?;
    subspace_projection_outcomes(&psi123)?
        .into_iter()
        .map(|(branch, probability, post)| {
            let bob_premessage = match &post {
                Some(post) => {
                    let reduced = {
                        let amp = |i12: usize, j: usize| post.amplitude(i12 * 2 + j);
                        Operator::from_fn(2, |j, l| {
                            (0..4).map(|i| amp(i, j) * amp(i, l).conj()).sum()
                        })
                    };
                    Some(DensityMatrix::from_unnormalized(reduced)?)
                }
                None => None,
            };
            Ok(Branch {
                probability,
                transcript: Transcript {
                    protocol: ONE_BIT_CONCLUSIVE,
                    input: input.clone(),
                    channel: *channel,
                    step_outcomes: vec![
                        StepOutcome {
                            step: "subspace",
                            outcome: branch.label().to_string(),
                        },
                        StepOutcome {
                            step: "usd",
                            outcome: "inconclusive".to_string(),
                        },
                    ],
                    classical_bits_sent: 1,
                    conclusive: false,
                    correction: None,
                    bob_final: None,
                    fidelity_achieved: None,
                },
                bob_premessage,
            })
        })
        .collect()
}

/// Runs one trial of a one-bit variant: Alice sends a single success flag
/// and nothing else.
pub fn one_bit_teleport<R: Rng + ?Sized>(
    input: &StateVector,
    channel: &ChannelSpec,
    rng: &mut R,
    mode: OneBitMode,
) -> Result<Transcript> {
    match mode {
        OneBitMode::SingletOnly => {
            let branches = one_bit_teleport_branches(input, channel, mode)?;
            let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
            let index = sample_index(&probs, rng)?;
            Ok(branches.into_iter().nth(index).expect("sampled").transcript)
        }
        OneBitMode::ConclusiveSingletOnly => {
            if channel.beta() <= 0.0 {
                let branches = product_channel_one_bit_branches(input, channel)?;
                let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
                let index = sample_index(&probs, rng)?;
                return Ok(branches.into_iter().nth(index).expect("sampled").transcript);
            }
            let kernel = ConclusiveKernel::new(channel)?;
            let input = input.clone().relabel(vec!["1"])?;
            let psi123 = three_particle_state(&input, channel)?;
            let (branch, post, _) = subspace_projection_step(&psi123, rng)?;
            let leaves = usd_leaves(&kernel, branch, &post);
            let probs: Vec<f64> = leaves.iter().map(|l| l.conditional_probability).collect();
            let index = sample_index(&probs, rng)?;
            let leaf = &leaves[index];
            let success = branch == SubspaceBranch::Antiparallel && leaf.usd_outcome == 1;
            conclusive_transcript(
                ONE_BIT_CONCLUSIVE,
                &input,
                channel,
                branch,
                leaf,
                success,
                1,
            )
        }
    }
}
