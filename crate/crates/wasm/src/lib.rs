//! Browser bindings for the static demo page in `www/`.
//!
//! Each exported function returns a JSON string. The plain functions in
//! [`demo`] do the work so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo {
    use serde::Serialize;

    use declustr::analysis::{reconstruction_workload, tradeoff_table, N20_LAMBDAS};
    use declustr::designs::{complete_design, example_3_8_4_1, hadamard_3design, Design};
    use declustr::erasure_codes::HorizontalCode;
    use declustr::layout::{build_layout, layout_geometry, DeclusteredLayout};
    use declustr::parity_groups::ParityGroup;

    fn err(e: impl ToString) -> String {
        e.to_string()
    }

    fn nums(parts: &[&str]) -> Result<Vec<usize>, String> {
        parts
            .iter()
            .map(|p| p.trim().parse().map_err(|_| format!("`{p}` is not a number")))
            .collect()
    }

    /// `example`, `hadamard:n` or `complete:n:k:t`.
    pub fn parse_design(spec: &str) -> Result<Design, String> {
        let parts: Vec<&str> = spec.split(':').collect();
        match parts[0] {
            "example" => Ok(example_3_8_4_1()),
            "hadamard" if parts.len() == 2 => hadamard_3design(nums(&parts[1..])?[0]).map_err(err),
            "complete" if parts.len() == 4 => {
                let v = nums(&parts[1..])?;
                complete_design(v[0], v[1], v[2]).map_err(err)
            }
            _ => Err(format!("unknown design `{spec}`")),
        }
    }

    /// `rdp:p` or `rs:k:delta`, with family `balanced`, `single` or `rotations`.
    pub fn parse_group(code: &str, family: &str) -> Result<ParityGroup, String> {
        let parts: Vec<&str> = code.split(':').collect();
        let code = match parts[0] {
            "rdp" if parts.len() == 2 => HorizontalCode::rdp(nums(&parts[1..])?[0]),
            "rs" if parts.len() == 3 => {
                let v = nums(&parts[1..])?;
                HorizontalCode::reed_solomon(v[0], v[1])
            }
            _ => return Err(format!("unknown code `{code}`")),
        }
        .map_err(err)?;
        match family {
            "balanced" => Ok(ParityGroup::balanced(code)),
            "single" => Ok(ParityGroup::single(code)),
            "rotations" => Ok(ParityGroup::rotations(code)),
            _ => Err(format!("unknown family `{family}`")),
        }
    }

    fn layout(design: &str, code: &str, family: &str) -> Result<DeclusteredLayout, String> {
        build_layout(&parse_group(code, family)?, &parse_design(design)?).map_err(err)
    }

    #[derive(Serialize)]
    struct Row {
        k: usize,
        lambda: u64,
        one: f64,
        two: f64,
        parity: f64,
        depth: String,
        one_text: String,
        two_text: String,
        parity_text: String,
    }

    /// Trade-off rows for `n` disks. `rows` is `k:lambda,…`; empty selects
    /// the n = 20 fixture, or `λ = 1` for every `k` when `n ≠ 20`.
    pub fn tradeoff(n: usize, rows: &str) -> Result<String, String> {
        let pairs: Vec<(usize, u64)> = if rows.trim().is_empty() {
            if n == 20 {
                N20_LAMBDAS.to_vec()
            } else {
                (3..=n).map(|k| (k, 1)).collect()
            }
        } else {
            rows.split(',')
                .map(|r| {
                    let (k, l) = r.split_once(':').ok_or_else(|| format!("`{r}` is not k:lambda"))?;
                    let v = nums(&[k, l])?;
                    Ok((v[0], v[1] as u64))
                })
                .collect::<Result<_, String>>()?
        };
        let table = tradeoff_table(n, &pairs).map_err(err)?;
        let to_f = |r: declustr::Ratio| *r.numer() as f64 / *r.denom() as f64;
        let out: Vec<Row> = table
            .iter()
            .map(|r| Row {
                k: r.k,
                lambda: r.lambda,
                one: 100.0 * to_f(r.pct_one),
                two: 100.0 * to_f(r.pct_two),
                parity: to_f(r.parity_disks),
                depth: r.depth_display(),
                one_text: r.pct_one_display(),
                two_text: r.pct_two_display(),
                parity_text: r.parity_display(),
            })
            .collect();
        serde_json::to_string(&out).map_err(err)
    }

    #[derive(Serialize)]
    struct Workload {
        n: usize,
        rows_per_disk: usize,
        failed: Vec<usize>,
        reads: Vec<u64>,
        uniform: bool,
        closed_form: Option<u64>,
        fraction: Option<String>,
    }

    /// Units each disk reads to rebuild `failed` (comma separated).
    pub fn workload(design: &str, code: &str, family: &str, failed: &str) -> Result<String, String> {
        let layout = layout(design, code, family)?;
        let failed: Vec<&str> = failed.split(',').filter(|s| !s.trim().is_empty()).collect();
        let r = reconstruction_workload(&layout, &nums(&failed)?).map_err(err)?;
        serde_json::to_string(&Workload {
            n: layout.n(),
            rows_per_disk: r.rows_per_disk,
            failed: r.failed,
            reads: r.reads,
            uniform: r.uniform,
            closed_form: r.closed_form,
            fraction: r.fraction.map(|f| f.to_string()),
        })
        .map_err(err)
    }

    #[derive(Serialize)]
    struct Grid {
        n: usize,
        instances: usize,
        group_depth: usize,
        rows_per_disk: usize,
        parity_disks: String,
        /// `disks[x]` lists `[instance, column]` top to bottom.
        disks: Vec<Vec<(usize, usize)>>,
        /// Symbols per column when the group has one arrangement.
        labels: Option<Vec<String>>,
    }

    /// Which group column of which instance sits in each column-unit slot.
    pub fn layout_grid(design: &str, code: &str, family: &str) -> Result<String, String> {
        let layout = layout(design, code, family)?;
        let g = layout_geometry(&layout);
        let group = layout.group();
        let labels = (group.extended_rows() == 1).then(|| {
            group.arrangements()[0]
                .labels()
                .iter()
                .map(|l| l.symbol(group.delta()))
                .collect()
        });
        serde_json::to_string(&Grid {
            n: g.n,
            instances: g.instances,
            group_depth: g.group_depth,
            rows_per_disk: g.rows_per_disk,
            parity_disks: g.parity_disks.to_string(),
            disks: (0..layout.n()).map(|x| layout.disk_units(x).to_vec()).collect(),
            labels,
        })
        .map_err(err)
    }
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tradeoff(n: usize, rows: &str) -> Result<String, JsValue> {
    js(demo::tradeoff(n, rows))
}

#[wasm_bindgen]
pub fn workload(design: &str, code: &str, family: &str, failed: &str) -> Result<String, JsValue> {
    js(demo::workload(design, code, family, failed))
}

#[wasm_bindgen(js_name = layoutGrid)]
pub fn layout_grid(design: &str, code: &str, family: &str) -> Result<String, JsValue> {
    js(demo::layout_grid(design, code, family))
}
