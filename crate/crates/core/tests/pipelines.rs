//! Deeper pipeline integration: fan products at depth s = 1, the enumerated
//! non-G* counterexample, and the larger inflation variants.

use std::collections::BTreeSet;
use std::time::Duration;

use oospc_core::constructions::{
    fan_product, gstar_expand_rows, rosqs8, rosqs_to_1fg, IngredientSet, K0Ingredient,
    ProductOutput,
};
use oospc_core::data::load_builtin;
use oospc_core::group::{develop, orbit_under, Action, Ambient, Block};
use oospc_core::model::{DesignFile, DesignInstance, DesignKind, FanDesign, Invariance};
use oospc_core::searcher::{search_all, SearchConstraint, SearchProblem};
use oospc_core::verifier::{verify_fan, verify_g_star, verify_group_design, Violation};

fn builtin_design(key: &str) -> DesignInstance {
    match load_builtin(key).unwrap().design {
        DesignFile::Design(d) => d,
        _ => panic!("{key} is not a plain design"),
    }
}

fn builtin_fan(key: &str) -> FanDesign {
    match load_builtin(key).unwrap().design {
        DesignFile::Fan(f) => f,
        _ => panic!("{key} is not a fan design"),
    }
}

/// Column-shift orbit representatives of a fully developed block list.
fn semicyclic_reps(blocks: &[Block]) -> Vec<Block> {
    let developed = develop(blocks, Action::Full).unwrap();
    let reps: BTreeSet<Block> = developed
        .into_iter()
        .map(|b| orbit_under(&b, Action::ColumnShift).representative)
        .collect();
    reps.into_iter().collect()
}

#[test]
fn fan_product_depth_one() {
    // Master: the strictly cyclic 1-fan of type 1^7 from the rotational SQS(8).
    let master = rosqs_to_1fg(&rosqs8().unwrap(), true).unwrap();

    // K0 ingredient: the Z3xZ3-invariant 1-fan of type 3^3 re-read as a strictly
    // semi-cyclic fan over I_3 x Z_3 (column-shift orbit representatives).
    let ex53 = builtin_fan("ex-5.3");
    let b0 = semicyclic_reps(ex53.b0());
    let b1 = semicyclic_reps(ex53.b1());
    assert_eq!((b0.len(), b1.len()), (3, 6));
    let semi = FanDesign::new(ex53.ambient(), 3, Invariance::SemiCyclic, b0, b1).unwrap();
    let r = verify_fan(&semi).unwrap();
    assert!(r.valid && r.strict, "{:?}", r.violations.first());

    let mut ing = IngredientSet::default();
    ing.k0.insert(3, K0Ingredient::Fan(semi));
    // The H(4, 3, 4, 3) slot is auto-filled.
    let (tau, phi) = fan_product(&master, 3, &ing, true).unwrap();
    let ProductOutput::Fan(tau) = tau else {
        panic!("expected a fan")
    };
    let ProductOutput::Fan(phi) = phi else {
        panic!("expected a fan")
    };
    assert_eq!(tau.ambient(), Ambient::new(7, 3).unwrap());
    assert_eq!(phi.ambient(), Ambient::new(21, 1).unwrap());
    for f in [&tau, &phi] {
        assert_eq!(f.b0().len(), 3);
        assert_eq!(f.b1().len(), 15);
        assert_eq!(f.k0(), vec![3]);
        assert_eq!(f.k1(), vec![4]);
        let r = verify_fan(f).unwrap();
        assert!(r.valid && r.strict, "{:?}", r.violations.first());
    }
}

#[test]
fn fan_product_missing_ingredient_is_named() {
    let master = rosqs_to_1fg(&rosqs8().unwrap(), false).unwrap();
    let err = fan_product(&master, 3, &IngredientSet::default(), false).unwrap_err();
    assert!(matches!(err, oospc_core::Error::Ingredient(_)), "{err}");
    assert!(err.to_string().contains("g^3"), "{err}");
}

#[test]
fn row_inflation_g5() {
    let d = gstar_expand_rows(&builtin_design("ex-3.1"), 5, true).unwrap();
    assert_eq!((d.ambient().rows, d.ambient().cols), (50, 2));
    assert_eq!(d.base_blocks().len(), 390);
}

#[test]
fn enumerated_g_design_that_is_not_g_star() {
    // Complete enumeration of strictly Z10xZ2-invariant G(5,4,4,3) designs
    // finds valid group designs whose symmetric triples are covered by blocks
    // of the wrong shape.
    let mut p = SearchProblem::packing(10, 2, 4, 3, 14);
    p.constraint = SearchConstraint::GDesign { e: 2 };
    p.steiner = true;
    p.budget = Duration::from_secs(60);
    let sols = search_all(&p, 16).unwrap();
    assert!(!sols.is_empty());
    let mut found_counterexample = false;
    for blocks in sols {
        let d = DesignInstance::new(
            Ambient::new(10, 2).unwrap(),
            DesignKind::GDesign,
            3,
            vec![4],
            Some(2),
            None,
            Invariance::Full,
            blocks,
        )
        .unwrap();
        let rg = verify_group_design(&d).unwrap();
        assert!(rg.valid && rg.strict);
        let rs = verify_g_star(&d).unwrap();
        if !rs.valid {
            assert!(rs
                .violations
                .iter()
                .any(|v| matches!(v, Violation::Shape { .. })));
            found_counterexample = true;
            break;
        }
    }
    assert!(
        found_counterexample,
        "every enumerated design satisfied the G* condition"
    );
}

#[test]
fn cyclic_expansion_rejects_broken_input() {
    // A cyclic G*-typed instance with a missing base block fails its input
    // verification, so the inflation refuses to run.
    let amb = Ambient::new(1, 10).unwrap();
    let d = DesignInstance::new(
        amb,
        DesignKind::CyclicGStar,
        3,
        vec![4],
        Some(5),
        None,
        Invariance::Full,
        vec![
            Block::from_pairs(amb, &[(0, 0), (0, 1), (0, 2), (0, 6)]).unwrap(),
            Block::from_pairs(amb, &[(0, 0), (0, 1), (0, 3), (0, 4)]).unwrap(),
        ],
    )
    .unwrap();
    let err = oospc_core::constructions::cyclic_gstar_expand(&d, 3, true).unwrap_err();
    assert!(
        matches!(err, oospc_core::Error::FailedVerification { .. }),
        "{err}"
    );
}

/// A full optimal-code pipeline: the cyclic quadruple system over Z_10 is
/// re-coordinatized over Z_5 x Z_2, inflated by g = 3, and filled (with the
/// empty sub-packing, since the one-dimensional bound at 6 points is 0),
/// producing an optimal code on Z_5 x Z_6 that meets the bound exactly.
#[test]
fn crt_pipeline_builds_optimal_5x6_code() {
    let mut p = SearchProblem::packing(1, 10, 4, 3, 3);
    p.constraint = SearchConstraint::CyclicGStar { spacing: 5 };
    let cyclic = oospc_core::searcher::search(&p).unwrap().design;

    let product = oospc_core::constructions::crt_split(&cyclic, 5).unwrap();
    assert_eq!(product.ambient(), Ambient::new(5, 2).unwrap());
    let r = verify_g_star(&product).unwrap();
    assert!(r.valid && r.strict, "{:?}", r.violations.first());

    let inflated = oospc_core::constructions::gstar_expand_cols(&product, 3, true).unwrap();
    assert_eq!(inflated.base_blocks().len(), 33);

    let empty_sub = DesignInstance::new(
        Ambient::new(1, 6).unwrap(),
        DesignKind::Packing,
        3,
        vec![4],
        None,
        None,
        Invariance::Full,
        vec![],
    )
    .unwrap();
    let code = oospc_core::constructions::fill(&inflated, &empty_sub, true).unwrap();
    let r = oospc_core::verifier::verify_packing(&code).unwrap();
    assert!(r.valid && r.strict);
    assert_eq!(
        r.optimal.map(|o| (o.size, o.bound, o.meets_bound)),
        Some((33, 33, true))
    );
}

#[test]
fn semicyclic_h4_supplies_k1_slot() {
    // Criterion-9 shaped product but letting the k = 4 slot auto-fill.
    let master =
        oospc_core::constructions::gdesign_to_1fg(&builtin_design("ex-3.1"), false).unwrap();
    let mut ing = IngredientSet::default();
    ing.k0
        .insert(2, K0Ingredient::Design(builtin_design("ex-3.5-g28")));
    let (tau, _) = fan_product(&master, 8, &ing, false).unwrap();
    assert_eq!(tau.base_block_count(), 1008);
}
