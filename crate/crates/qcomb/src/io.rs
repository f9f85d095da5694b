//! JSON encoding/decoding of the crate's objects.
//!
//! Complex numbers are `[re, im]` pairs; matrices are nested row-major
//! arrays of pairs; space tuples are lists of `{"label", "dim"}` objects with
//! the leftmost space the most significant tensor index.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::combs::{Comb, CombKind, Tooth};
use crate::linalg::CMatrix;
use crate::multitime::{MultiTimeMeasurement, MultiTimeOutcome, MultiTimeState};
use crate::network::{NetworkGraph, Wire};
use crate::operators::LabeledOperator;
use crate::realization::{FinalPolicy, IsometrySequence};
use crate::spaces::{LabeledSpace, SpaceTuple};
use crate::testers::Tester;
use crate::QcombError;

fn parse_err(msg: impl Into<String>) -> QcombError {
    QcombError::Parse(msg.into())
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, QcombError> {
    v.as_object()
        .ok_or_else(|| parse_err(format!("{what}: expected object")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Value, QcombError> {
    m.get(key)
        .ok_or_else(|| parse_err(format!("missing field `{key}`")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64, QcombError> {
    v.as_f64()
        .ok_or_else(|| parse_err(format!("{what}: expected number")))
}

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value) -> Result<Complex64, QcombError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| parse_err("complex number: expected [re, im]"))?;
    Ok(Complex64::new(
        as_f64(&arr[0], "re")?,
        as_f64(&arr[1], "im")?,
    ))
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|r| Value::Array((0..m.ncols()).map(|c| complex_to_json(m[(r, c)])).collect()))
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_json(v: &Value) -> Result<CMatrix, QcombError> {
    let rows = v
        .as_array()
        .ok_or_else(|| parse_err("matrix: expected array of rows"))?;
    if rows.is_empty() {
        return Err(parse_err("matrix: no rows"));
    }
    let cols = rows[0]
        .as_array()
        .ok_or_else(|| parse_err("matrix row: expected array"))?
        .len();
    let mut out = CMatrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == cols)
            .ok_or_else(|| parse_err("matrix: ragged rows"))?;
        for (j, z) in row.iter().enumerate() {
            out[(i, j)] = complex_from_json(z)?;
        }
    }
    Ok(out)
}

pub fn vector_to_json(v: &CMatrix) -> Value {
    Value::Array((0..v.nrows()).map(|i| complex_to_json(v[(i, 0)])).collect())
}

pub fn vector_from_json(v: &Value) -> Result<CMatrix, QcombError> {
    let entries = v
        .as_array()
        .ok_or_else(|| parse_err("vector: expected array"))?;
    let mut out = CMatrix::zeros(entries.len(), 1);
    for (i, z) in entries.iter().enumerate() {
        out[(i, 0)] = complex_from_json(z)?;
    }
    Ok(out)
}

pub fn spaces_to_json(t: &SpaceTuple) -> Value {
    Value::Array(
        t.spaces()
            .iter()
            .map(|s| json!({"label": s.label, "dim": s.dim}))
            .collect(),
    )
}

pub fn spaces_from_json(v: &Value) -> Result<SpaceTuple, QcombError> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err("spaces: expected array"))?;
    let mut spaces = Vec::with_capacity(arr.len());
    for s in arr {
        let m = as_object(s, "space")?;
        let label = field(m, "label")?
            .as_str()
            .ok_or_else(|| parse_err("space label: expected string"))?;
        let dim = field(m, "dim")?
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| parse_err("space dim: expected positive integer"))?;
        spaces.push(LabeledSpace::new(label, dim as usize));
    }
    SpaceTuple::new(spaces)
}

pub fn operator_to_json(op: &LabeledOperator) -> Value {
    json!({
        "spaces": spaces_to_json(op.spaces()),
        "matrix": matrix_to_json(op.matrix()),
    })
}

pub fn operator_from_json(v: &Value) -> Result<LabeledOperator, QcombError> {
    let m = as_object(v, "operator")?;
    let spaces = spaces_from_json(field(m, "spaces")?)?;
    let matrix = matrix_from_json(field(m, "matrix")?)?;
    LabeledOperator::new(spaces, matrix)
}

fn tooth_to_json(t: &Tooth) -> Value {
    json!({"in": spaces_to_json(&t.input), "out": spaces_to_json(&t.output)})
}

fn tooth_from_json(v: &Value) -> Result<Tooth, QcombError> {
    let m = as_object(v, "tooth")?;
    Ok(Tooth::new(
        spaces_from_json(field(m, "in")?)?,
        spaces_from_json(field(m, "out")?)?,
    ))
}

fn teeth_to_json(teeth: &[Tooth]) -> Value {
    Value::Array(teeth.iter().map(tooth_to_json).collect())
}

fn teeth_from_json(v: &Value) -> Result<Vec<Tooth>, QcombError> {
    v.as_array()
        .ok_or_else(|| parse_err("teeth: expected array"))?
        .iter()
        .map(tooth_from_json)
        .collect()
}

pub fn comb_to_json(c: &Comb) -> Value {
    json!({
        "teeth": teeth_to_json(&c.teeth),
        "kind": match c.kind {
            CombKind::Deterministic => "deterministic",
            CombKind::Probabilistic => "probabilistic",
        },
        "operator": operator_to_json(&c.op),
    })
}

pub fn comb_from_json(v: &Value) -> Result<Comb, QcombError> {
    let m = as_object(v, "comb")?;
    let teeth = teeth_from_json(field(m, "teeth")?)?;
    let kind = match field(m, "kind")?.as_str() {
        Some("deterministic") => CombKind::Deterministic,
        Some("probabilistic") => CombKind::Probabilistic,
        other => {
            return Err(parse_err(format!(
                "kind: expected deterministic|probabilistic, got {other:?}"
            )))
        }
    };
    let op = operator_from_json(field(m, "operator")?)?;
    Comb::new(teeth, op, kind)
}

pub fn tester_to_json(t: &Tester) -> Value {
    json!({
        "elements": t.elements.iter().map(operator_to_json).collect::<Vec<_>>(),
        "teeth": teeth_to_json(&t.comb_teeth),
    })
}

pub fn tester_from_json(v: &Value) -> Result<Tester, QcombError> {
    let m = as_object(v, "tester")?;
    let elements = field(m, "elements")?
        .as_array()
        .ok_or_else(|| parse_err("elements: expected array"))?
        .iter()
        .map(operator_from_json)
        .collect::<Result<Vec<_>, _>>()?;
    let teeth = teeth_from_json(field(m, "teeth")?)?;
    Tester::new(elements, teeth)
}

pub fn graph_to_json(g: &NetworkGraph) -> Value {
    let nodes: Map<String, Value> = g
        .nodes
        .iter()
        .map(|(id, comb)| (id.clone(), comb_to_json(comb)))
        .collect();
    let wires: Vec<Value> = g
        .wires
        .iter()
        .map(|w| {
            json!({
                "from": [w.from_node, w.from_label],
                "to": [w.to_node, w.to_label],
            })
        })
        .collect();
    json!({"nodes": nodes, "wires": wires})
}

fn endpoint_from_json(v: &Value, what: &str) -> Result<(String, String), QcombError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| parse_err(format!("{what}: expected [node, label]")))?;
    let node = arr[0]
        .as_str()
        .ok_or_else(|| parse_err(format!("{what}: node id must be a string")))?;
    let label = arr[1]
        .as_str()
        .ok_or_else(|| parse_err(format!("{what}: label must be a string")))?;
    Ok((node.to_string(), label.to_string()))
}

pub fn graph_from_json(v: &Value) -> Result<NetworkGraph, QcombError> {
    let m = as_object(v, "graph")?;
    let nodes_v = as_object(field(m, "nodes")?, "nodes")?;
    let mut nodes = std::collections::BTreeMap::new();
    for (id, comb_v) in nodes_v {
        nodes.insert(id.clone(), comb_from_json(comb_v)?);
    }
    let mut wires = Vec::new();
    for w in field(m, "wires")?
        .as_array()
        .ok_or_else(|| parse_err("wires: expected array"))?
    {
        let wm = as_object(w, "wire")?;
        let (fa, fb) = endpoint_from_json(field(wm, "from")?, "wire.from")?;
        let (ta, tb) = endpoint_from_json(field(wm, "to")?, "wire.to")?;
        wires.push(Wire::new(fa, fb, ta, tb));
    }
    Ok(NetworkGraph::new(nodes, wires))
}

pub fn isometry_sequence_to_json(s: &IsometrySequence) -> Value {
    json!({
        "steps": s.steps.iter().map(matrix_to_json).collect::<Vec<_>>(),
        "teeth": teeth_to_json(&s.teeth),
        "ancilla_dims": s.ancilla_dims,
        "final_policy": match s.final_policy {
            FinalPolicy::TraceOut => "trace_out",
            FinalPolicy::Measure => "measure",
        },
    })
}

pub fn isometry_sequence_from_json(v: &Value) -> Result<IsometrySequence, QcombError> {
    let m = as_object(v, "isometry sequence")?;
    let steps = field(m, "steps")?
        .as_array()
        .ok_or_else(|| parse_err("steps: expected array"))?
        .iter()
        .map(matrix_from_json)
        .collect::<Result<Vec<_>, _>>()?;
    let teeth = teeth_from_json(field(m, "teeth")?)?;
    let ancilla_dims = field(m, "ancilla_dims")?
        .as_array()
        .ok_or_else(|| parse_err("ancilla_dims: expected array"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|d| d as usize)
                .ok_or_else(|| parse_err("ancilla dim: expected integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let final_policy = match field(m, "final_policy")?.as_str() {
        Some("trace_out") => FinalPolicy::TraceOut,
        Some("measure") => FinalPolicy::Measure,
        other => return Err(parse_err(format!("final_policy: unknown value {other:?}"))),
    };
    Ok(IsometrySequence {
        steps,
        teeth,
        ancilla_dims,
        final_policy,
    })
}

pub fn multitime_state_to_json(s: &MultiTimeState) -> Value {
    json!({
        "psi0": vector_to_json(&s.psi0),
        "middle": s
            .middle
            .iter()
            .map(|(psi, phi)| json!({"psi": vector_to_json(psi), "phi": vector_to_json(phi)}))
            .collect::<Vec<_>>(),
        "phiN": vector_to_json(&s.phi_n),
    })
}

pub fn multitime_state_from_json(v: &Value) -> Result<MultiTimeState, QcombError> {
    let m = as_object(v, "multitime state")?;
    let psi0 = vector_from_json(field(m, "psi0")?)?;
    let middle = field(m, "middle")?
        .as_array()
        .ok_or_else(|| parse_err("middle: expected array"))?
        .iter()
        .map(|p| {
            let pm = as_object(p, "middle pair")?;
            Ok((
                vector_from_json(field(pm, "psi")?)?,
                vector_from_json(field(pm, "phi")?)?,
            ))
        })
        .collect::<Result<Vec<_>, QcombError>>()?;
    let phi_n = vector_from_json(field(m, "phiN")?)?;
    MultiTimeState::new(psi0, middle, phi_n)
}

pub fn multitime_measurement_to_json(m: &MultiTimeMeasurement) -> Value {
    json!({
        "outcomes": m
            .outcomes
            .iter()
            .map(|o| {
                json!({
                    "label": o.label,
                    "kraus": o.kraus.iter().map(matrix_to_json).collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
        "in_dims": m.in_dims,
        "out_dims": m.out_dims,
    })
}

pub fn multitime_measurement_from_json(v: &Value) -> Result<MultiTimeMeasurement, QcombError> {
    let m = as_object(v, "multitime measurement")?;
    let outcomes = field(m, "outcomes")?
        .as_array()
        .ok_or_else(|| parse_err("outcomes: expected array"))?
        .iter()
        .map(|o| {
            let om = as_object(o, "outcome")?;
            let label = field(om, "label")?
                .as_str()
                .ok_or_else(|| parse_err("outcome label: expected string"))?
                .to_string();
            let kraus = field(om, "kraus")?
                .as_array()
                .ok_or_else(|| parse_err("kraus: expected array"))?
                .iter()
                .map(matrix_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(MultiTimeOutcome { label, kraus })
        })
        .collect::<Result<Vec<_>, QcombError>>()?;
    let dims = |key: &str| -> Result<Vec<usize>, QcombError> {
        field(m, key)?
            .as_array()
            .ok_or_else(|| parse_err(format!("{key}: expected array")))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|d| d as usize)
                    .ok_or_else(|| parse_err("dim: expected integer"))
            })
            .collect()
    };
    Ok(MultiTimeMeasurement {
        outcomes,
        in_dims: dims("in_dims")?,
        out_dims: dims("out_dims")?,
    })
}
