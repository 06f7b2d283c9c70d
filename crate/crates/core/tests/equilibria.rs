use proptest::prelude::*;

use valign::alignment::{uniform_grid, SweepParams, ValueModel};
use valign::equilibria::{
    find_pareto, is_alignment_equilibrium, stage_pareto_dominates, AlignmentTable, CellAlignment,
    ProfileId, SpaceKind,
};
use valign::{
    Action, classical_nash_check, find_alignment_equilibria, AgentId, AlignmentEstimate, EquilibriumReport,
    JointAction, PayoffMatrix, StrategySpace, StrategySpec, Tolerance, ValueAssignment, ValueId,
};

const L: usize = 6;

fn grid_space() -> StrategySpace {
    StrategySpace::random_grid(&uniform_grid(11)).unwrap()
}

fn hetero_space() -> StrategySpace {
    StrategySpace::heterogeneous(
        &[StrategySpec::TitForTat, StrategySpec::MostlyCooperate, StrategySpec::MostlyDefect],
        &uniform_grid(11),
    )
    .unwrap()
}

fn exact_report(space: &StrategySpace, a: ValueId, b: ValueId) -> EquilibriumReport {
    find_alignment_equilibria(
        &ValueModel::default(),
        space,
        ValueAssignment::new(a, b),
        &SweepParams::exact(L),
        None,
    )
    .unwrap()
}

fn id(alpha: usize, beta: usize) -> ProfileId {
    ProfileId::new(alpha, beta)
}

/// Closed-form per-round gain expectation for alpha with random actions.
fn gain(p: f64, q: f64) -> f64 {
    (1.0 / 3.0) * p * q - p * (1.0 - q) + (1.0 - p) * q - (1.0 / 3.0) * (1.0 - p) * (1.0 - q)
}

#[test]
fn gain_grid_examples() {
    let space = grid_space();
    let r = exact_report(&space, ValueId::PersonalGain, ValueId::PersonalGain);
    let tol = Tolerance::Fixed(0.0);
    assert!(is_alignment_equilibrium(&space, id(0, 0), &r.table, tol).unwrap());
    assert!(!is_alignment_equilibrium(&space, id(10, 10), &r.table, tol).unwrap());
    assert_eq!(r.equilibria, vec![id(0, 0)]);
    assert!(!r.is_pareto_optimal(id(0, 0)));
    assert!(r.is_pareto_optimal(id(10, 10)));
}

#[test]
fn gain_pareto_matches_closed_form_brute_force() {
    let space = grid_space();
    let r = exact_report(&space, ValueId::PersonalGain, ValueId::PersonalGain);
    let g = uniform_grid(11);
    let dominated = |i: usize, j: usize| {
        let (a, b) = (gain(g[i], g[j]), gain(g[j], g[i]));
        space.profiles().any(|o| {
            let (c, d) = (gain(g[o.alpha], g[o.beta]), gain(g[o.beta], g[o.alpha]));
            let eps = 1e-12;
            (c > a + eps || d > b + eps) && c >= a - eps && d >= b - eps
        })
    };
    let want: Vec<_> = space.profiles().filter(|p| !dominated(p.alpha, p.beta)).collect();
    assert_eq!(r.pareto_optimal, want);

    // The summed expectation has a unique maximiser at mutual cooperation.
    let best = space
        .profiles()
        .max_by(|x, y| {
            let s = |p: &ProfileId| gain(g[p.alpha], g[p.beta]) + gain(g[p.beta], g[p.alpha]);
            s(x).total_cmp(&s(y))
        })
        .unwrap();
    assert_eq!(best, id(10, 10));
}

#[test]
fn gain_equality_row_coincides_with_gain_gain() {
    let space = grid_space();
    let gg = exact_report(&space, ValueId::PersonalGain, ValueId::PersonalGain);
    let ge = exact_report(&space, ValueId::PersonalGain, ValueId::Equality);
    assert_eq!(ge.equilibria, vec![id(0, 0)]);
    assert_eq!(ge.equilibria, gg.equilibria);
    assert!(!ge.is_pareto_optimal(id(0, 0)));
}

#[test]
fn equality_grid_equilibria_are_diagonal_with_endpoints() {
    let space = grid_space();
    for l in [2, 4, 6] {
        let r = find_alignment_equilibria(
            &ValueModel::default(),
            &space,
            ValueAssignment::both(ValueId::Equality),
            &SweepParams::exact(l),
            None,
        )
        .unwrap();
        assert!(r.equilibria.iter().all(|p| p.alpha == p.beta), "l={l}: {:?}", r.equilibria);
        assert!(r.equilibria.contains(&id(0, 0)));
        assert!(r.equilibria.contains(&id(10, 10)));
        assert!(r.is_pareto_optimal(id(0, 0)) && r.is_pareto_optimal(id(10, 10)));
    }
}

#[test]
fn heterogeneous_examples() {
    let space = hetero_space();
    let eq = exact_report(&space, ValueId::Equality, ValueId::Equality);
    assert!(eq.equilibria.contains(&id(0, 10)));
    assert!(eq.equilibria.contains(&id(1, 10)));
    assert_eq!(eq.behaviorally_equivalent(id(0, 10)).unwrap(), vec![id(1, 10)]);

    let eg = exact_report(&space, ValueId::Equality, ValueId::PersonalGain);
    assert!(eg.equilibria.iter().all(|p| eq.equilibria.contains(p)));
    assert!(eg.equilibria.contains(&id(0, 10)));
    assert!(eg.is_pareto_optimal(id(0, 10)));

    for a in [ValueId::Equality, ValueId::PersonalGain] {
        let r = exact_report(&space, ValueId::PersonalGain, a);
        assert!(r.equilibria.contains(&id(2, 0)));
        assert!(!r.is_pareto_optimal(id(2, 0)));
    }
}

fn reverify(space: &StrategySpace, r: &EquilibriumReport) {
    let t = &r.table;
    for p in space.profiles() {
        let here = t.get(p).unwrap();
        let alpha_ok = (0..space.alpha_options.len())
            .all(|i| t.get(id(i, p.beta)).unwrap().alpha.mean <= here.alpha.mean);
        let beta_ok = (0..space.beta_options.len())
            .all(|j| t.get(id(p.alpha, j)).unwrap().beta.mean <= here.beta.mean);
        assert_eq!(r.equilibria.contains(&p), alpha_ok && beta_ok, "{}", space.label(p));

        let dominated = space.profiles().any(|o| {
            let c = t.get(o).unwrap();
            let better = c.alpha.mean > here.alpha.mean || c.beta.mean > here.beta.mean;
            better && c.alpha.mean >= here.alpha.mean && c.beta.mean >= here.beta.mean
        });
        assert_eq!(r.is_pareto_optimal(p), !dominated, "{}", space.label(p));
    }
}

#[test]
fn reports_survive_literal_recheck() {
    let values = [ValueId::Equality, ValueId::PersonalGain];
    for space in [grid_space(), hetero_space()] {
        for a in values {
            for b in values {
                let r = exact_report(&space, a, b);
                assert_eq!(r.tolerance, Tolerance::Fixed(0.0));
                reverify(&space, &r);
            }
        }
    }
}

#[test]
fn stage_game_nash_is_dominated() {
    let m = PayoffMatrix::default();
    let nash = classical_nash_check(&m);
    let dd = JointAction::new(Action::Defect, Action::Defect);
    let cc = JointAction::new(Action::Cooperate, Action::Cooperate);
    assert_eq!(nash, vec![dd]);
    assert!(stage_pareto_dominates(&m, cc, dd));
}

fn est(mean: f64) -> AlignmentEstimate {
    AlignmentEstimate { mean, std_error: 0.0, num_paths: 1, path_length: 1, exact: true }
}

proptest! {
    #[test]
    fn arbitrary_tables_are_checked_consistently(
        n in 1usize..5,
        m in 1usize..5,
        vals in prop::collection::vec((-3i32..4, -3i32..4), 16),
        slack in 0u8..3,
    ) {
        let space = StrategySpace::new(
            vec![StrategySpec::Random(0.0); n],
            vec![StrategySpec::Random(0.0); m],
            SpaceKind::RandomGrid,
        ).unwrap();
        let mut t = AlignmentTable::new(ValueAssignment::both(ValueId::PersonalGain));
        for p in space.profiles() {
            let (a, b) = vals[p.alpha * 4 + p.beta];
            t.insert(p, CellAlignment { alpha: est(a as f64), beta: est(b as f64) });
        }
        let tol = Tolerance::Fixed(slack as f64);
        let s = slack as f64;
        let pareto = find_pareto(&space, &t, tol).unwrap();
        for p in space.profiles() {
            let here = t.get(p).unwrap();
            let is_eq = is_alignment_equilibrium(&space, p, &t, tol).unwrap();
            let literal = (0..n).all(|i| t.get(id(i, p.beta)).unwrap().alpha.mean <= here.alpha.mean + s)
                && (0..m).all(|j| t.get(id(p.alpha, j)).unwrap().beta.mean <= here.beta.mean + s);
            prop_assert_eq!(is_eq, literal);
            for o in space.profiles() {
                let c = t.get(o).unwrap();
                let dom = [AgentId::Alpha, AgentId::Beta].iter().any(|&g| c.of(g).mean > here.of(g).mean + s)
                    && [AgentId::Alpha, AgentId::Beta].iter().all(|&g| c.of(g).mean >= here.of(g).mean - s);
                if pareto.contains(&p) {
                    prop_assert!(!dom);
                }
            }
        }
        if slack == 0 {
            prop_assert!(!pareto.is_empty());
        }
    }
}
