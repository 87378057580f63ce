//! Imperfect resources, sender-identification attacks and the closed-form
//! security bounds they are checked against.

mod bounds;
mod discrimination;
mod noise;

pub use bounds::{parity_success_bounds, theorem2_bound, theorem3_bound};
pub use discrimination::{pgm_success, sender_guess_attack, GuessReport};
pub use noise::{
    eigenstates_with_value, junk_states, make_noisy_source, perturbed_state, JunkKind, NoiseSpec, NoisySource,
    MAX_NOISE_N,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::AgentId;
    use crate::qstate::{ghz_state, GhzSign};

    #[test]
    fn closed_forms() {
        assert_eq!(parity_success_bounds(7, 0.0).unwrap(), (1.0, 1.0));
        let (lo, hi) = parity_success_bounds(5, 0.4).unwrap();
        assert!((lo - 0.9).abs() < 1e-15 && (hi - 0.975).abs() < 1e-15);
        assert!((theorem2_bound(9, 4, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((theorem3_bound(2, 0.04).unwrap() - 0.7).abs() < 1e-15);
        assert!((theorem3_bound(5, 0.01).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(theorem3_bound(1, 0.5).unwrap(), 1.0);
        assert!(parity_success_bounds(5, -0.1).is_err());
        assert!(theorem2_bound(5, 0, 0.1).is_err());
    }

    #[test]
    fn junk_kinds_parse() {
        assert_eq!("minus".parse::<JunkKind>().unwrap(), JunkKind::Minus);
        assert_eq!("eigen:-2".parse::<JunkKind>().unwrap(), JunkKind::Eigen(-2));
        assert!("eigen:x".parse::<JunkKind>().is_err());
        assert_eq!(JunkKind::Eigen(2).to_string(), "eigen:2");
    }

    #[test]
    fn eigen_junk_excludes_ghz() {
        assert_eq!(eigenstates_with_value(3, 0).unwrap().len(), 6);
        assert_eq!(eigenstates_with_value(5, 2).unwrap().len(), 15);
        assert!(eigenstates_with_value(5, 6).unwrap().is_empty());
        assert!(junk_states(5, JunkKind::Eigen(6)).is_err());
        assert_eq!(eigenstates_with_value(5, -6).unwrap().len(), 1);
    }

    #[test]
    fn noise_expectations() {
        let a = NoiseSpec::with_kind(3, 0.1, JunkKind::Eigen(0)).unwrap();
        assert!((a.bell_expectation() - 3.6).abs() < 1e-12);
        let b = NoiseSpec::with_kind(3, 0.05, JunkKind::Minus).unwrap();
        assert!((b.bell_expectation() - 3.6).abs() < 1e-12);
        assert!((b.parity_success() - 0.95).abs() < 1e-12);
        let c = NoiseSpec::with_target_epsilon(5, 0.4, junk_states(5, JunkKind::Eigen(2)).unwrap()).unwrap();
        assert!((c.delta() - 0.1).abs() < 1e-12);
        assert!((c.parity_success() - (1.0 - 0.4 / 12.0)).abs() < 1e-12);
        assert!(NoiseSpec::with_target_epsilon(3, 9.0, junk_states(3, JunkKind::Minus).unwrap()).is_err());
    }

    #[test]
    fn non_orthogonal_junk_rejected() {
        let ghz = ghz_state(3, GhzSign::Plus).unwrap();
        let err = NoiseSpec::new(3, 0.1, vec![(1.0, ghz)]).unwrap_err();
        assert!(matches!(err, crate::Error::InvalidNoise(_)));
    }

    #[test]
    fn ideal_state_is_unguessable() {
        let ghz = ghz_state(5, GhzSign::Plus).unwrap();
        let honest: Vec<AgentId> = (1..=3).map(AgentId).collect();
        let r = sender_guess_attack(&ghz, &honest).unwrap();
        assert!((r.pgm_success - 1.0 / 3.0).abs() < 1e-10);
        assert_eq!(r.helstrom_success, None);
        assert!(sender_guess_attack(&ghz, &[AgentId(1)]).is_err());
        assert!(sender_guess_attack(&ghz, &[AgentId(1), AgentId(1)]).is_err());
    }
}
