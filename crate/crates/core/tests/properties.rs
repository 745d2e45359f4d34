//! Property tests for the structural invariants: anything that must hold
//! for *every* state, POVM or channel, checked on randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use telepovm::discrimination::usd_povm;
use telepovm::ensembles::{ensemble_density, generate_at_distance};
use telepovm::measure::{induced_povm, outcome_distribution, validate_povm, Povm};
use telepovm::protocols::{
    premessage_average, standard_teleport_branches, total_probability, ChannelSpec,
};
use telepovm::qcore::{
    equal_up_to_global_phase, fidelity, hermitian_eig, partial_trace, psd_sqrt, schmidt_decompose,
    DensityMatrix, Operator, StateVector,
};
use telepovm::random::{random_povm, random_projective_measurement, random_qubit, random_state};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Strategy: a normalized complex amplitude vector of the given length.
fn amplitude_vector(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_filter_map(
        "norm too small",
        |pairs| {
            let amps: Vec<Complex64> = pairs.iter().map(|&(re, im)| c(re, im)).collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                return None;
            }
            Some(amps.into_iter().map(|a| a / norm).collect())
        },
    )
}

fn bipartite_state() -> impl Strategy<Value = StateVector> {
    amplitude_vector(4).prop_map(|amps| StateVector::from_amplitudes(amps, vec![2, 2]).unwrap())
}

fn qubit_state() -> impl Strategy<Value = StateVector> {
    amplitude_vector(2).prop_map(|amps| StateVector::from_amplitudes(amps, vec![2]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Reduced states of random pure states stay trace-one with eigenvalues
    /// inside [−1e-10, 1+1e-10], on either factor.
    #[test]
    fn partial_trace_spectra_stay_physical(psi in bipartite_state()) {
        let rho = DensityMatrix::from_pure(&psi);
        for keep in [&["1"][..], &["2"][..]] {
            let reduced = partial_trace(&rho, psi.dims(), psi.labels(), keep).unwrap();
            prop_assert!((reduced.op().trace().re - 1.0).abs() < 1e-12);
            let (vals, _) = hermitian_eig(reduced.op()).unwrap();
            for v in vals {
                prop_assert!((-1e-10..=1.0 + 1e-10).contains(&v));
            }
        }
    }

    /// Schmidt decomposition reconstructs the input up to a global phase.
    #[test]
    fn schmidt_roundtrip(psi in bipartite_state()) {
        let form = schmidt_decompose(&psi).unwrap();
        prop_assert!(form.verify_against(&psi));
        let rebuilt = form.reconstruct().unwrap();
        prop_assert!(equal_up_to_global_phase(&rebuilt, &psi, 1e-10).unwrap());
    }

    /// Fidelity is symmetric, phase-invariant, and exactly 1 on identical
    /// states (within 1e-12).
    #[test]
    fn fidelity_properties(a in qubit_state(), b in qubit_state(), phase in 0.0..std::f64::consts::TAU) {
        prop_assert!((fidelity(&a, &b).unwrap() - fidelity(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        let rotated = StateVector::from_amplitudes(
            a.amplitudes().iter().map(|x| x * Complex64::from_polar(1.0, phase)).collect(),
            vec![2],
        ).unwrap();
        prop_assert!((fidelity(&a, &rotated).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((fidelity(&b, &rotated).unwrap() - fidelity(&b, &a).unwrap()).abs() < 1e-12);
    }

    /// `psd_sqrt(G†G)² = G†G` entrywise within 1e-10.
    #[test]
    fn psd_sqrt_squares_back(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
        let g = Operator::new(entries.iter().map(|&(re, im)| c(re, im)).collect(), 4).unwrap();
        let x = g.adjoint().matmul(&g).unwrap();
        let root = psd_sqrt(&x).unwrap();
        prop_assert!(root.matmul(&root).unwrap().max_abs_diff(&x).unwrap() < 1e-10);
        prop_assert!(root.hermiticity_residual() < 1e-10);
    }

    /// A POVM induced from any valid joint projective measurement passes
    /// validation: completeness is inherited through the contraction.
    #[test]
    fn induced_povm_always_valid(seed in 0u64..1_000_000, theta in 0.0..std::f64::consts::TAU) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let joint = random_projective_measurement(&mut rng, 4);
        let aux = DensityMatrix::from_pure(&StateVector::qubit_xz(theta));
        let povm = induced_povm(&joint, &aux).unwrap();
        prop_assert!(validate_povm(&povm).passes());
    }

    /// Born-rule outcome distributions sum to one.
    #[test]
    fn distributions_sum_to_one(seed in 0u64..1_000_000, outcomes in 2usize..=6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let state = random_state(&mut rng, vec![2, 2]);
        let povm = random_povm(&mut rng, 2, outcomes).unwrap();
        let probs = outcome_distribution(&state, &povm, &["1"]).unwrap();
        let total: f64 = probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for p in probs {
            prop_assert!(p > -1e-12);
        }
    }

    /// Remote ensemble generation reproduces Bob's reduced density matrix
    /// and agrees with the measurement module on the probabilities.
    #[test]
    fn hjw_consistency(seed in 0u64..1_000_000, outcomes in 2usize..=6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let shared = random_state(&mut rng, vec![2, 2]);
        let povm = random_povm(&mut rng, 2, outcomes).unwrap();
        let ensemble = generate_at_distance(&shared, &povm).unwrap();
        prop_assert!(ensemble.mixture_residual().unwrap() < 1e-10);
        let direct = outcome_distribution(&shared, &povm, &["1"]).unwrap();
        for (member, p) in ensemble.members.iter().zip(direct) {
            prop_assert!((member.probability - p.max(0.0)).abs() < 1e-12);
        }
    }

    /// Rank-1 effects on a pure shared state leave Bob in a pure state.
    #[test]
    fn rank_one_effects_give_pure_members(shared in bipartite_state(), theta in 0.0..std::f64::consts::TAU) {
        let povm = telepovm::measure::telepovm_elements(theta);
        let ensemble = generate_at_distance(&shared, &povm).unwrap();
        for member in &ensemble.members {
            if member.probability > 1e-9 {
                let rho = member.state.density().unwrap();
                prop_assert!(rho.purity() >= 1.0 - 1e-10);
            }
        }
    }

    /// USD setups stay sound (valid POVM, zero misidentification) for any
    /// distinct pair of qubit states.
    #[test]
    fn usd_construction_sound(u in qubit_state(), v in qubit_state()) {
        let overlap = u.inner(&v).unwrap().norm();
        prop_assume!(overlap < 1.0 - 1e-6);
        let setup = usd_povm(&u, &v).unwrap();
        prop_assert!(setup.is_sound());
        // conclusive rate is 1 − s for either input
        let probs_u = telepovm::discrimination::born_probabilities(&setup.u, &setup).unwrap();
        prop_assert!((probs_u[0] - (1.0 - setup.overlap)).abs() < 1e-10);
        prop_assert!(probs_u[1].abs() < 1e-12);
    }

    /// Standard teleportation: branches exhaust probability and the
    /// pre-message average never depends on the input.
    #[test]
    fn standard_teleport_bookkeeping(input in qubit_state(), alpha_sq in 0.5f64..1.0) {
        let channel = ChannelSpec::from_alpha_squared(alpha_sq).unwrap();
        let branches = standard_teleport_branches(&input, &channel).unwrap();
        prop_assert!((total_probability(&branches) - 1.0).abs() < 1e-10);
        let avg = premessage_average(&branches).unwrap();
        prop_assert!(avg.op().max_abs_diff(channel.reduced_bob().op()).unwrap() < 1e-10);
    }
}

/// Empirical frequencies from sampled projective measurements match the
/// Born distribution within four binomial standard deviations.
#[test]
fn sampled_frequencies_match_distribution() {
    let mut rng = ChaCha12Rng::seed_from_u64(2718);
    let state = random_state(&mut rng, vec![2, 2]);
    let m = random_projective_measurement(&mut rng, 4);
    let as_povm = Povm::new(m.projectors().to_vec(), m.labels().to_vec()).unwrap();
    let expected = outcome_distribution(&state, &as_povm, &["1", "2"]).unwrap();
    let n = 100_000usize;
    let mut counts = vec![0usize; m.len()];
    for _ in 0..n {
        let record = telepovm::measure::measure_projective(&state, &m, &mut rng).unwrap();
        let idx = m.labels().iter().position(|l| *l == record.label).unwrap();
        counts[idx] += 1;
    }
    for (count, p) in counts.iter().zip(&expected) {
        let p_hat = *count as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt().max(1e-9);
        assert!(
            (p_hat - p).abs() <= 4.0 * sigma,
            "outcome probability {p}, empirical {p_hat}"
        );
    }
}

/// Mixed-member path: a two-outcome POVM with rank-2 effects leaves Bob
/// holding genuinely mixed conditional states that still mix back to ρ.
#[test]
fn higher_rank_effects_give_mixed_members() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let shared = random_state(&mut rng, vec![2, 2]);
    let half = Operator::identity(2).scale(c(0.5, 0.0));
    let povm = Povm::new(vec![half.clone(), half], vec!["first", "second"]).unwrap();
    let ensemble = generate_at_distance(&shared, &povm).unwrap();
    assert!(ensemble.mixture_residual().unwrap() < 1e-10);
    for member in &ensemble.members {
        assert!((member.probability - 0.5).abs() < 1e-12);
        // ½·I effects do not condition at all: Bob keeps his reduced state,
        // which for a random shared state is mixed.
        let rho = member.state.density().unwrap();
        assert!(rho.purity() < 1.0 - 1e-3);
    }
    let mixture = ensemble_density(&ensemble).unwrap();
    assert!(mixture.op().max_abs_diff(ensemble.target.op()).unwrap() < 1e-12);
}

/// The projective route and the POVM route agree on a shared example: the
/// Bell measurement as a 4-outcome measurement of rank-1 projectors.
#[test]
fn projective_and_povm_routes_agree() {
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    let bell = telepovm::measure::bell_basis();
    let as_povm = Povm::new(bell.projectors().to_vec(), bell.labels().to_vec()).unwrap();
    for _ in 0..25 {
        let input = random_qubit(&mut rng);
        let channel = ChannelSpec::from_alpha_squared(0.7).unwrap();
        let psi = telepovm::protocols::three_particle_state(&input, &channel).unwrap();
        let proj = telepovm::measure::projective_outcomes_on(&psi, &bell, &["1", "2"]).unwrap();
        let povm = telepovm::measure::povm_outcomes_on(&psi, &as_povm, &["1", "2"]).unwrap();
        for (a, b) in proj.iter().zip(&povm) {
            assert!((a.probability - b.probability).abs() < 1e-12);
            if let (Some(sa), Some(sb)) = (&a.post_state, &b.post_state) {
                assert!(equal_up_to_global_phase(sa, sb, 1e-10).unwrap());
            }
        }
    }
}

/// A projective measurement is a special case of a POVM; its induced
/// ensemble members must be the post-measurement states themselves.
#[test]
fn projective_measurement_on_singlet_is_its_own_ensemble() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let m = random_projective_measurement(&mut rng, 2);
    let povm = Povm::new(m.projectors().to_vec(), m.labels().to_vec()).unwrap();
    let singlet = StateVector::singlet();
    let ensemble = generate_at_distance(&singlet, &povm).unwrap();
    assert!(ensemble.mixture_residual().unwrap() < 1e-10);
    let total: f64 = ensemble.members.iter().map(|m| m.probability).sum();
    assert!((total - 1.0).abs() < 1e-10);
    // singlet anticorrelation: Bob's member is orthogonal to Alice's
    // projector direction
    for (member, projector) in ensemble.members.iter().zip(m.projectors()) {
        let bob = member.state.as_pure().unwrap();
        let overlap = (0..2)
            .map(|r| {
                (0..2)
                    .map(|col| bob.amplitude(r).conj() * projector.get(r, col) * bob.amplitude(col))
                    .sum::<Complex64>()
            })
            .sum::<Complex64>();
        assert!(overlap.norm() < 1e-10, "Bob state not orthogonal");
    }
}

/// Validation must flag a perturbed POVM (negative control).
#[test]
fn perturbed_povm_fails_validation() {
    let povm = telepovm::measure::telepovm_elements(0.9);
    let mut elements = povm.elements().to_vec();
    elements[0] = elements[0].scale(c(1.01, 0.0));
    let perturbed = Povm::with_numbered_labels(elements).unwrap();
    let report = validate_povm(&perturbed);
    assert!(!report.passes());
    assert!(report.completeness_residual > 1e-3);
}
