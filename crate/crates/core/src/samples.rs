//! Ready-made specs and models used by the verification suites, the CLI
//! defaults and the test suite.

use std::collections::BTreeMap;

use crate::tree::{EdgeClass, EdgeTypeModel, SlotRecord, TreeSpec, TypeRecord};

fn slot(child: &str, p: f64) -> SlotRecord {
    SlotRecord {
        child_type: child.into(),
        down_prob: p,
    }
}

/// Two-type spec with unequal probabilities and mixed branching.
pub fn lopsided() -> TreeSpec {
    let mut types = BTreeMap::new();
    types.insert(
        "root".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("a", 0.6), slot("b", 0.4)],
        },
    );
    types.insert(
        "a".into(),
        TypeRecord {
            up_prob: 0.3,
            slots: vec![slot("a", 0.5), slot("b", 0.2)],
        },
    );
    types.insert(
        "b".into(),
        TypeRecord {
            up_prob: 0.45,
            slots: vec![slot("a", 0.55)],
        },
    );
    TreeSpec::new("root", types).expect("sample spec is structurally valid")
}

/// Period-four chain with a three-way branch once per period.  Balls grow
/// like 3^(radius/4), slow enough for deep series horizons.
pub fn slim_wide() -> TreeSpec {
    let mut types = BTreeMap::new();
    types.insert(
        "root".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("a", 0.5), slot("a", 0.5)],
        },
    );
    types.insert(
        "a".into(),
        TypeRecord {
            up_prob: 0.4,
            slots: vec![slot("b", 0.6)],
        },
    );
    types.insert(
        "b".into(),
        TypeRecord {
            up_prob: 0.35,
            slots: vec![slot("c", 0.2), slot("c", 0.25), slot("c", 0.2)],
        },
    );
    types.insert(
        "c".into(),
        TypeRecord {
            up_prob: 0.5,
            slots: vec![slot("d", 0.5)],
        },
    );
    types.insert(
        "d".into(),
        TypeRecord {
            up_prob: 0.45,
            slots: vec![slot("a", 0.55)],
        },
    );
    TreeSpec::new("root", types).expect("sample spec is structurally valid")
}

/// Period-three chain whose only branching happens every third level.
pub fn slim_period_three() -> TreeSpec {
    let mut types = BTreeMap::new();
    types.insert(
        "root".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("a", 1.0)],
        },
    );
    types.insert(
        "a".into(),
        TypeRecord {
            up_prob: 0.5,
            slots: vec![slot("b", 0.5)],
        },
    );
    types.insert(
        "b".into(),
        TypeRecord {
            up_prob: 0.4,
            slots: vec![slot("c", 0.25), slot("c", 0.35)],
        },
    );
    types.insert(
        "c".into(),
        TypeRecord {
            up_prob: 0.55,
            slots: vec![slot("a", 0.45)],
        },
    );
    TreeSpec::new("root", types).expect("sample spec is structurally valid")
}

/// Four-type cycle with a single two-way branch per period.
pub fn slim_period_four() -> TreeSpec {
    let mut types = BTreeMap::new();
    types.insert(
        "root".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("p", 0.7), slot("q", 0.3)],
        },
    );
    types.insert(
        "p".into(),
        TypeRecord {
            up_prob: 0.45,
            slots: vec![slot("q", 0.55)],
        },
    );
    types.insert(
        "q".into(),
        TypeRecord {
            up_prob: 0.5,
            slots: vec![slot("r", 0.5)],
        },
    );
    types.insert(
        "r".into(),
        TypeRecord {
            up_prob: 0.4,
            slots: vec![slot("s", 0.6)],
        },
    );
    types.insert(
        "s".into(),
        TypeRecord {
            up_prob: 0.38,
            slots: vec![slot("p", 0.32), slot("r", 0.3)],
        },
    );
    TreeSpec::new("root", types).expect("sample spec is structurally valid")
}

/// Balanced binary forward tree: every vertex feeds two children at 1/2.
pub fn binary_forward() -> TreeSpec {
    let mut types = BTreeMap::new();
    types.insert(
        "root".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("n", 0.5), slot("n", 0.5)],
        },
    );
    types.insert(
        "n".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("n", 0.5), slot("n", 0.5)],
        },
    );
    TreeSpec::new("root", types).expect("sample spec is structurally valid")
}

/// Forward tree with two types and uneven splitting probabilities.
pub fn skewed_forward() -> TreeSpec {
    let mut types = BTreeMap::new();
    types.insert(
        "root".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("a", 0.3), slot("b", 0.7)],
        },
    );
    types.insert(
        "a".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("a", 0.4), slot("b", 0.6)],
        },
    );
    types.insert(
        "b".into(),
        TypeRecord {
            up_prob: 0.0,
            slots: vec![slot("a", 0.55), slot("b", 0.45)],
        },
    );
    TreeSpec::new("root", types).expect("sample spec is structurally valid")
}

/// One involutive class of degree three: simple random walk on `T_2`.
pub fn srw_edge_model() -> EdgeTypeModel {
    let mut classes = BTreeMap::new();
    classes.insert(
        1,
        EdgeClass {
            inverse: 1,
            degree: 3,
            prob: 1.0 / 3.0,
        },
    );
    EdgeTypeModel::new(classes).expect("sample model is well formed")
}

/// Oriented pair of classes plus one involutive class, anisotropic.
pub fn oriented_edge_model() -> EdgeTypeModel {
    let mut classes = BTreeMap::new();
    classes.insert(
        1,
        EdgeClass {
            inverse: -1,
            degree: 2,
            prob: 0.2,
        },
    );
    classes.insert(
        -1,
        EdgeClass {
            inverse: 1,
            degree: 1,
            prob: 0.25,
        },
    );
    classes.insert(
        2,
        EdgeClass {
            inverse: 2,
            degree: 1,
            prob: 0.35,
        },
    );
    EdgeTypeModel::new(classes).expect("sample model is well formed")
}

/// Two involutive classes with distinct weights, total degree four.
pub fn two_class_edge_model() -> EdgeTypeModel {
    let mut classes = BTreeMap::new();
    classes.insert(
        1,
        EdgeClass {
            inverse: 1,
            degree: 2,
            prob: 0.3,
        },
    );
    classes.insert(
        2,
        EdgeClass {
            inverse: 2,
            degree: 2,
            prob: 0.2,
        },
    );
    EdgeTypeModel::new(classes).expect("sample model is well formed")
}
