//! Metrics JSON emission against the shipped schema, and run comparison CSV.

use rosetta_pd_core::metrics::{MetricsError, MetricsRecord};
use rosetta_pd_core::num::format_ratio;
use serde_json::Value;

/// The versioned schema document every emitted record validates against.
pub const METRICS_SCHEMA: &str = include_str!("../schema/metrics.v1.schema.json");

fn schema() -> Value {
    serde_json::from_str(METRICS_SCHEMA).expect("shipped schema is valid JSON")
}

fn type_ok(ty: &str, v: &Value) -> bool {
    match ty {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "string" => v.is_string(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        "array" => v.is_array(),
        "object" => v.is_object(),
        _ => false,
    }
}

/// Checks `value` against the keyword subset the shipped schema uses: type,
/// const, required, properties, additionalProperties, minimum and items.
/// Returns one message per problem, with a JSON-pointer-like path.
pub fn validate_against(schema: &Value, value: &Value, path: &str, out: &mut Vec<String>) {
    let Some(s) = schema.as_object() else { return };
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_ok(t, value),
            Value::Array(ts) => ts.iter().filter_map(Value::as_str).any(|t| type_ok(t, value)),
            _ => true,
        };
        if !ok {
            out.push(format!("{path}: expected type {t}, found {value}"));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != value {
            out.push(format!("{path}: expected {c}, found {value}"));
        }
    }
    if let (Some(min), Some(v)) = (s.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if v < min {
            out.push(format!("{path}: {v} is below the minimum {min}"));
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), value.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            validate_against(items, v, &format!("{path}/{i}"), out);
        }
    }
    if let Some(obj) = value.as_object() {
        if let Some(req) = s.get("required").and_then(Value::as_array) {
            for k in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(k) {
                    out.push(format!("{path}: missing required key `{k}`"));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, v) in obj {
            let sub = format!("{path}/{k}");
            match props.and_then(|p| p.get(k)) {
                Some(ps) => validate_against(ps, v, &sub, out),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => out.push(format!("{path}: unknown key `{k}`")),
                    Some(extra @ Value::Object(_)) => validate_against(extra, v, &sub, out),
                    _ => {}
                },
            }
        }
    }
}

/// Schema check of a JSON text, then the record invariants.
pub fn validate_metrics_json(text: &str) -> Result<MetricsRecord, MetricsError> {
    let value: Value = serde_json::from_str(text).map_err(|e| MetricsError::SchemaViolation(e.to_string()))?;
    let mut problems = Vec::new();
    validate_against(&schema(), &value, "", &mut problems);
    if !problems.is_empty() {
        return Err(MetricsError::SchemaViolation(problems.join("; ")));
    }
    let record: MetricsRecord = serde_json::from_value(value).map_err(|e| MetricsError::SchemaViolation(e.to_string()))?;
    record.check()?;
    Ok(record)
}

/// Pretty JSON in field declaration order. Identical records give identical
/// bytes.
pub fn emit_metrics(record: &MetricsRecord) -> Result<String, MetricsError> {
    record.check()?;
    let mut text = serde_json::to_string_pretty(record).map_err(|e| MetricsError::SchemaViolation(e.to_string()))?;
    text.push('\n');
    validate_metrics_json(&text)?;
    Ok(text)
}

pub const COMPARE_COLUMNS: [&str; 19] = [
    "Design",
    "Flow",
    "Stage",
    "Clock_ns",
    "Core_um2",
    "StdCell_um2",
    "Power_mW",
    "rWL_mm",
    "HPWL_mm",
    "WNS_ns",
    "TNS_ns",
    "DRVs",
    "FEPs",
    "HBT_Cnt",
    "Cutsize",
    "Instances",
    "Utilization",
    "Runtime_s",
    "Memory_KiB",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV row per record sorted by (design, flow, stage). Missing values are
/// empty cells. Areas are µm² and lengths mm, converted exactly from DBU.
pub fn compare_runs(records: &[MetricsRecord]) -> String {
    let mut rows: Vec<&MetricsRecord> = records.iter().collect();
    rows.sort_by(|a, b| (&a.design, &a.flow, &a.stage).cmp(&(&b.design, &b.flow, &b.stage)));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARE_COLUMNS).expect("in-memory write");
    for r in rows {
        let u = r.dbu_per_micron.max(1) as i128;
        let mm = |v: i64| format_ratio(v as i128, u * 1000);
        let um2 = |v: i64| format_ratio(v as i128, u * u);
        w.write_record([
            r.design.clone(),
            r.flow.clone(),
            r.stage.clone(),
            opt(r.clock_period_ns),
            um2(r.core_area),
            um2(r.stdcell_area),
            opt(r.power_total_mw),
            opt(r.wirelength_routed.map(mm)),
            mm(r.wirelength_hpwl),
            opt(r.timing_wns_ns),
            opt(r.timing_tns_ns),
            String::new(),
            String::new(),
            opt(r.hbt_estimate),
            opt(r.cutsize),
            r.instance_count.to_string(),
            opt(r.utilization.map(|u| format!("{u:.4}"))),
            format!("{:.3}", r.runtime_s),
            opt(r.memory_peak_kib),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Peak resident set size of this process in KiB, where the platform reports it.
pub fn peak_memory_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}
