use homrate::effective::{decomposition_check, hbar_estimate, EstimateConfig, Method};
use homrate::engine::{corrector_value_game, default_dt, lower_value_estimate, upper_value_estimate, CORRECTOR_DT};
use homrate::game::{PlanarGame, SpatialGame};
use homrate::policies::{baseline_families, corrector_family, CorrectorRule, PolicyISpec};
use homrate::torus::ProfileKind;

fn paper_cfg() -> EstimateConfig {
    EstimateConfig {
        profile: ProfileKind::Paper.spatial(),
        horizon: 100.0,
        resolution: 0,
        seed: 0,
    }
}

#[test]
fn upper_estimate_dominates_lower_estimate() {
    let game = PlanarGame::new(ProfileKind::Paper.planar());
    let (fam_i, fam_ii) = baseline_families(1);
    for eps in [1.0 / 256.0, 1.0 / 1024.0] {
        let up = upper_value_estimate(&game, eps, &fam_ii, 1.0, default_dt(eps)).unwrap();
        let lo = lower_value_estimate(&game, eps, &fam_i, 1.0, default_dt(eps)).unwrap();
        assert!(lo.value > 0.0);
        assert!(up.value >= lo.value, "ε = {eps}: {} < {}", up.value, lo.value);
        assert_eq!(up.members.len(), 4);
        assert_eq!(lo.members.len(), 3);
    }
}

#[test]
fn lower_family_prefers_stay_for_moderate_eps() {
    let game = PlanarGame::new(ProfileKind::Paper.planar());
    let eps = 1.0 / 1024.0;
    let lo = lower_value_estimate(&game, eps, &[PolicyISpec::Stay, PolicyISpec::Home], 1.0, default_dt(eps)).unwrap();
    let stay = lo.members.iter().find(|m| m.name == "stay").unwrap();
    assert_eq!(lo.value, lo.members.iter().map(|m| m.total()).fold(f64::INFINITY, f64::min));
    assert!(stay.total() > 0.0);
}

#[test]
fn decomposition_at_diagonal_points() {
    let cfg = paper_cfg();
    let est = |p: &[f64; 3]| hbar_estimate(p, Method::Game, &cfg).map(|e| e.value);
    let diag = est(&[1.0, 1.0, 1.0]).unwrap();
    assert!((diag - 200.0).abs() <= 20.0, "{diag}");
    let half = est(&[0.5, 0.5, 0.5]).unwrap();
    assert!(half.abs() <= 10.0, "{half}");
    let gap = decomposition_check(&[[1.0, 0.0, 0.0], [0.0, -2.0, 0.0]], est).unwrap();
    assert_eq!(gap, 0.0);
}

#[test]
fn two_axis_momentum_follows_the_larger_component() {
    let v = hbar_estimate(&[1.0, 1.0, 0.0], Method::Game, &paper_cfg()).unwrap().value;
    assert!((v - 200.0).abs() <= 10.0, "{v}");
}

#[test]
fn literal_clamp_rule_halves_the_estimate() {
    let game = SpatialGame::new(ProfileKind::Paper.spatial());
    let fam = corrector_family(0);
    let bang = corrector_value_game(&game, &[1.0, 0.0, 0.0], 100.0, CORRECTOR_DT, &fam, CorrectorRule::BangBang).unwrap();
    let clamp =
        corrector_value_game(&game, &[1.0, 0.0, 0.0], 100.0, CORRECTOR_DT, &fam, CorrectorRule::LiteralClamp).unwrap();
    assert!((bang.value - 200.0).abs() <= 10.0);
    assert!((clamp.value - 100.0).abs() <= 10.0);
}

#[test]
fn corrector_refuses_short_horizon() {
    let game = SpatialGame::new(ProfileKind::Paper.spatial());
    let err = corrector_value_game(&game, &[1.0, 0.0, 0.0], 5.0, CORRECTOR_DT, &corrector_family(0), CorrectorRule::BangBang)
        .unwrap_err();
    assert!(err.is_precondition());
}
