//! Expansion of value-list constraints into the Cartesian product of
//! concrete scenarios.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::model::{
    check_concrete, model_to_source, Concreteness, Relation, ScenarioModel, Value,
};

/// Default guardrail against accidental combinatorial explosion.
pub const DEFAULT_EXPANSION_CAP: usize = 10_000;

/// One varied parameter: all `in`-constraints of a model, ordered by source
/// position, values in listing order.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationAxis {
    pub call_id: usize,
    pub param: String,
    pub values: Vec<Value>,
}

/// One point of the Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteVariant {
    pub base_name: String,
    pub index_vector: Vec<usize>,
    pub assignment: BTreeMap<(usize, String), Value>,
    /// `name.i_j_...` built from the index vector; empty index vector yields
    /// the bare scenario name.
    pub variant_id: String,
}

#[derive(Debug, thiserror::Error)]
pub enum VariationError {
    #[error("expansion of {product} variants exceeds the cap of {cap}")]
    CapExceeded { product: usize, cap: usize },
    #[error("variant assignment targets unknown call {call_id} parameter '{param}'")]
    UnknownTarget { call_id: usize, param: String },
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// The variation axes of a model: its `in` constraints in source order.
pub fn variation_axes(model: &ScenarioModel) -> Vec<VariationAxis> {
    model
        .constraints
        .iter()
        .filter(|c| c.relation == Relation::In)
        .map(|c| VariationAxis {
            call_id: c.call_id,
            param: c.param.clone(),
            values: c.values.clone(),
        })
        .collect()
}

/// Enumerate all variants in lexicographic order of index vectors, last axis
/// fastest. A model without axes yields exactly one variant with an empty
/// assignment.
pub fn enumerate_variations(model: &ScenarioModel) -> Result<Vec<ConcreteVariant>, VariationError> {
    enumerate_variations_capped(model, DEFAULT_EXPANSION_CAP)
}

pub fn enumerate_variations_capped(
    model: &ScenarioModel,
    cap: usize,
) -> Result<Vec<ConcreteVariant>, VariationError> {
    let axes = variation_axes(model);
    let mut product = 1usize;
    for axis in &axes {
        product = product.saturating_mul(axis.values.len());
    }
    if product > cap {
        return Err(VariationError::CapExceeded { product, cap });
    }
    let mut variants = Vec::with_capacity(product);
    let mut index_vector = vec![0usize; axes.len()];
    loop {
        let mut assignment = BTreeMap::new();
        for (axis, &idx) in axes.iter().zip(&index_vector) {
            assignment.insert(
                (axis.call_id, axis.param.clone()),
                axis.values[idx].clone(),
            );
        }
        let variant_id = if index_vector.is_empty() {
            model.name.clone()
        } else {
            let indices: Vec<String> = index_vector.iter().map(|i| i.to_string()).collect();
            format!("{}.{}", model.name, indices.join("_"))
        };
        variants.push(ConcreteVariant {
            base_name: model.name.clone(),
            index_vector: index_vector.clone(),
            assignment,
            variant_id,
        });
        // advance the last axis fastest
        let mut pos = index_vector.len();
        loop {
            if pos == 0 {
                return Ok(variants);
            }
            pos -= 1;
            index_vector[pos] += 1;
            if index_vector[pos] < axes[pos].values.len() {
                break;
            }
            index_vector[pos] = 0;
        }
    }
}

/// Substitute a variant's assignment into a copy of the model. The result
/// passes [`check_concrete`]; the input model is left untouched.
pub fn materialize(
    model: &ScenarioModel,
    variant: &ConcreteVariant,
) -> Result<ScenarioModel, VariationError> {
    let mut out = model.clone();
    for ((call_id, param), value) in &variant.assignment {
        let mut found = false;
        out.behavior.visit_calls_mut(&mut |call| {
            if call.id == *call_id {
                call.args.insert(param.clone(), value.clone());
                found = true;
            }
        });
        if !found {
            return Err(VariationError::UnknownTarget {
                call_id: *call_id,
                param: param.clone(),
            });
        }
    }
    debug_assert_eq!(check_concrete(&out), Concreteness::Concrete);
    Ok(out)
}

/// Write one pretty-printed `.osc` file per variant into `out_dir`, named
/// `<scenario>_<variant-id>.osc`. Returns the written paths.
pub fn write_variants(
    model: &ScenarioModel,
    variants: &[ConcreteVariant],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, VariationError> {
    std::fs::create_dir_all(out_dir).map_err(|source| VariationError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(variants.len());
    for variant in variants {
        let concrete = materialize(model, variant)?;
        let source = model_to_source(&concrete);
        let path = out_dir.join(format!("{}_{}.osc", model.name, variant.variant_id));
        std::fs::write(&path, source).map_err(|source| VariationError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ConstraintSet};
    use crate::units::PhysicalValue;
    use std::collections::BTreeSet;

    fn build(src: &str) -> ScenarioModel {
        let tokens = crate::lexer::tokenize(src, "t.osc").unwrap();
        let ast = crate::parser::parse(&tokens).unwrap();
        build_model(&ast, &BTreeMap::new()).unwrap().remove(0)
    }

    const SWEEP: &str = "\
import osc.standard
import osc.robotics

scenario fault_sweep:
    robot: differential_drive_robot
    do serial:
        set_node_parameter(
            node_name: 'laserscan_modification',
            parameter_name: 'gaussian_noise_std_deviation') with:
            keep(it.parameter_value in ['0.0', '0.1', '0.2', '0.3', '0.4', '0.5', '0.6', '0.7'])
        set_node_parameter() with:
            keep(it.node_name == 'laserscan_modification')
            keep(it.parameter_name == 'random_drop_percentage')
            keep(it.parameter_value in ['0.0', '0.1', '0.2', '0.3', '0.4', '0.5', '0.6', '0.7'])
        emit end
";

    #[test]
    fn two_axes_of_eight_yield_64_variants() {
        let model = build(SWEEP);
        let variants = enumerate_variations(&model).unwrap();
        assert_eq!(variants.len(), 64);
        let ids: BTreeSet<&str> = variants.iter().map(|v| v.variant_id.as_str()).collect();
        assert_eq!(ids.len(), 64, "variant ids must be unique");
        assert_eq!(variants[0].variant_id, "fault_sweep.0_0");
        assert_eq!(variants[1].variant_id, "fault_sweep.0_1"); // last axis fastest
        assert_eq!(variants[63].variant_id, "fault_sweep.7_7");
    }

    #[test]
    fn zero_axes_yield_one_empty_variant() {
        let model = build(
            "import osc.robotics\nscenario s:\n    do serial:\n        emit end\n",
        );
        let variants = enumerate_variations(&model).unwrap();
        assert_eq!(variants.len(), 1);
        assert!(variants[0].assignment.is_empty());
        let copy = materialize(&model, &variants[0]).unwrap();
        assert_eq!(copy, model);
    }

    /// Independent nested-loop oracle: the expansion of axis sizes (2,3,5)
    /// must produce exactly the brute-force tuple set.
    #[test]
    fn enumeration_matches_nested_loop_oracle() {
        let mut model = build(SWEEP);
        // rewrite the recorded constraints to sizes (2,3,5)
        let sizes = [2usize, 3, 5];
        let mut in_axes = Vec::new();
        for (c, size) in model
            .constraints
            .iter_mut()
            .filter(|c| c.relation == Relation::In)
            .zip(sizes)
        {
            c.values.truncate(size);
            in_axes.push(c.clone());
        }
        // third axis via a synthetic constraint on the same call
        model.constraints.push(ConstraintSet {
            call_id: in_axes[1].call_id,
            param: "node_name".to_string(),
            relation: Relation::In,
            values: (0..5)
                .map(|i| Value::Str(format!("node{i}")))
                .collect(),
        });
        let variants = enumerate_variations(&model).unwrap();
        assert_eq!(variants.len(), 30);
        let got: BTreeSet<Vec<usize>> = variants.iter().map(|v| v.index_vector.clone()).collect();
        let mut expected = BTreeSet::new();
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..5 {
                    expected.insert(vec![i, j, k]);
                }
            }
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn every_materialized_variant_is_concrete_and_pure() {
        let mut model = build(SWEEP);
        for c in model
            .constraints
            .iter_mut()
            .filter(|c| c.relation == Relation::In)
        {
            c.values.truncate(3);
        }
        let before = model.clone();
        let variants = enumerate_variations(&model).unwrap();
        assert_eq!(variants.len(), 9);
        let mut assignments = BTreeSet::new();
        for variant in &variants {
            let concrete = materialize(&model, variant).unwrap();
            assert_eq!(check_concrete(&concrete), Concreteness::Concrete);
            let again = materialize(&model, variant).unwrap();
            assert_eq!(concrete, again, "materialize must be pure");
            assignments.insert(format!("{:?}", variant.assignment));
        }
        assert_eq!(assignments.len(), variants.len(), "no duplicate assignments");
        assert_eq!(model, before, "original model must be unmodified");
    }

    #[test]
    fn cap_exceeded_rejected() {
        let model = build(SWEEP);
        let err = enumerate_variations_capped(&model, 63).unwrap_err();
        assert!(matches!(err, VariationError::CapExceeded { product: 64, cap: 63 }));
    }

    #[test]
    fn written_variants_reparse_to_concrete_models() {
        let mut model = build(SWEEP);
        for c in model
            .constraints
            .iter_mut()
            .filter(|c| c.relation == Relation::In)
        {
            c.values.truncate(2);
        }
        let variants = enumerate_variations(&model).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_variants(&model, &variants, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        for file in &files {
            let source = std::fs::read_to_string(file).unwrap();
            let reparsed = build(&source);
            assert_eq!(check_concrete(&reparsed), Concreteness::Concrete, "{file:?}");
        }
    }

    #[test]
    fn single_variant_file_equals_pretty_printed_input() {
        let model = build(
            "import osc.robotics\nscenario solo:\n    do serial:\n        emit end\n",
        );
        let variants = enumerate_variations(&model).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_variants(&model, &variants, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        let written = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(written, model_to_source(&model));
    }

    #[test]
    fn product_law_randomized() {
        // randomized axis configurations with product <= 10_000
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..50 {
            let axis_count = (next() % 4) as usize + 1;
            let mut model = build(
                "import osc.robotics\nscenario s:\n    do serial:\n        emit end\n",
            );
            let mut product = 1usize;
            for axis in 0..axis_count {
                let size = (next() % 9) as usize + 1;
                if product.saturating_mul(size) > 10_000 {
                    break;
                }
                product *= size;
                model.constraints.push(ConstraintSet {
                    call_id: axis,
                    param: format!("p{axis}"),
                    relation: Relation::In,
                    values: (0..size)
                        .map(|i| Value::Physical(PhysicalValue::dimensionless(i as f64)))
                        .collect(),
                });
            }
            let variants = enumerate_variations(&model).unwrap();
            assert_eq!(variants.len(), product);
        }
    }
}
