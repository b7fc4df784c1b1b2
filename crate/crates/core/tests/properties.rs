//! Property tests over closures, formulas and the point decision procedures.

mod common;

use std::collections::HashMap;
use std::sync::OnceLock;

use ipdef::closure::{closure, ClosureCache};
use ipdef::decide::{eval_testpoints, qe, PointFormula, PointTheory};
use ipdef::formulas::{dual_transform, parse};
use ipdef::relations::ExplicitSet;
use ipdef::rulebase::{bundled, ClassTag, Rule};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHAIN: &str = "derivation chain";

fn rules() -> &'static [Rule] {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(bundled)
}

fn caches() -> &'static [(ClassTag, ClosureCache)] {
    static CACHES: OnceLock<Vec<(ClassTag, ClosureCache)>> = OnceLock::new();
    CACHES.get_or_init(|| ClassTag::ALL.iter().map(|&c| (c, ClosureCache::new(rules(), c))).collect())
}

fn set() -> impl Strategy<Value = ExplicitSet> {
    (0u16..1 << 14).prop_map(ExplicitSet)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn closure_is_extensive_monotone_idempotent(s in set(), t in set()) {
        for (_, cache) in caches() {
            let cs = cache.closure(s);
            prop_assert!(s.is_subset(cs));
            prop_assert_eq!(cache.closure(cs), cs);
            prop_assert!(cs.is_subset(cache.closure(s.union(t))));
        }
    }

    #[test]
    fn closure_commutes_with_symmetry(s in set()) {
        for (class, cache) in caches() {
            prop_assert_eq!(cache.closure(s.symmetric()), cache.closure(s).symmetric(), "class {}", class);
        }
    }

    #[test]
    fn cache_agrees_with_direct_closure(s in set()) {
        for (class, cache) in caches() {
            prop_assert_eq!(cache.closure(s), closure(s, rules(), *class));
        }
    }

    #[test]
    fn qe_agrees_with_test_points(seed in any::<u64>(), which in 0usize..5) {
        let th = [
            PointTheory::DloOpen,
            PointTheory::DloLeft,
            PointTheory::DloRight,
            PointTheory::DloClosed,
            PointTheory::DiscreteUnbounded,
        ][which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = common::random_sentence(&mut rng, th, 3);
        let by_qe = match qe(&f, th).expect("qe applies") {
            PointFormula::True => true,
            PointFormula::False => false,
            other => panic!("qe left a non-constant sentence: {other:?}"),
        };
        prop_assert_eq!(Some(by_qe), eval_testpoints(&f, th, &HashMap::new()).ok());
    }
}

#[test]
fn chain_rules_follow_from_the_other_rules() {
    let base: Vec<Rule> = rules().iter().filter(|r| r.provenance != CHAIN).cloned().collect();
    let chain: Vec<&Rule> = rules().iter().filter(|r| r.provenance == CHAIN).collect();
    assert!(!chain.is_empty());
    for r in chain {
        let c = closure(r.premises, &base, r.class);
        assert!(c.contains(r.target), "{} is not reproduced: closure is {c}", r.id);
    }
}

#[test]
fn formulas_round_trip_and_dualize_involutively() {
    let formulas: Vec<_> = rules().iter().filter_map(|r| r.formula.as_ref()).collect();
    assert!(!formulas.is_empty());
    for f in formulas {
        assert_eq!(&parse(&f.to_string()).expect("printed formula parses"), f);
        let d = dual_transform(f).expect("rule formulas use explicit relations");
        assert_eq!(&dual_transform(&d).expect("dual is dualizable"), f);
    }
}
