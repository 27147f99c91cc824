//! Grouped bar charts rendered straight to SVG from `aggregate.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mobisim::metrics::reference;

use crate::error::CliError;
use crate::report::write_file;

struct Chart {
    file: &'static str,
    column: &'static str,
    title: &'static str,
    reference: f64,
}

const CHARTS: [Chart; 4] = [
    Chart {
        file: "r.svg",
        column: "mean_r",
        title: "mean r = (A+B)/C",
        reference: reference::MEAN_R,
    },
    Chart {
        file: "l.svg",
        column: "mean_l",
        title: "mean added links L",
        reference: reference::MEAN_L,
    },
    Chart {
        file: "b_over_l.svg",
        column: "b_over_l",
        title: "B/L",
        reference: reference::B_OVER_L,
    },
    Chart {
        file: "totals.svg",
        column: "bandwidth_ratio",
        title: "total links: sum(A+B) / sum(C)",
        reference: reference::TOTAL_AB / reference::TOTAL_C,
    },
];

const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1",
];

/// (topology type, model) -> value, in first-seen order of types and models.
#[derive(Debug, Default)]
struct Table {
    types: Vec<String>,
    models: Vec<String>,
    values: BTreeMap<(String, String), f64>,
}

fn read_table(path: &Path, column: &str) -> Result<Table, CliError> {
    let fail = |reason: String| CliError::Report {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| fail(format!("missing column {name}")))
    };
    let (ty, model, col) = (idx("type")?, idx("model")?, idx(column)?);
    let mut table = Table::default();
    for rec in reader.records() {
        let rec = rec.map_err(|e| fail(e.to_string()))?;
        let (t, m, v) = (&rec[ty], &rec[model], &rec[col]);
        if !table.types.iter().any(|x| x == t) {
            table.types.push(t.to_string());
        }
        if !table.models.iter().any(|x| x == m) {
            table.models.push(m.to_string());
        }
        if v.is_empty() {
            continue;
        }
        let v: f64 = v
            .parse()
            .map_err(|_| fail(format!("bad {column} value {v:?}")))?;
        table.values.insert((t.to_string(), m.to_string()), v);
    }
    if table.types.is_empty() {
        return Err(fail("no rows".into()));
    }
    Ok(table)
}

fn render(chart: &Chart, table: &Table) -> String {
    const BAR: f64 = 22.0;
    const GAP: f64 = 18.0;
    const LEFT: f64 = 60.0;
    const TOP: f64 = 40.0;
    const PLOT_H: f64 = 240.0;
    let group_w = BAR * table.models.len() as f64 + GAP;
    let width = LEFT + group_w * table.types.len() as f64 + 140.0;
    let height = TOP + PLOT_H + 50.0;
    let top_value = table
        .values
        .values()
        .copied()
        .fold(chart.reference, f64::max)
        * 1.1;
    let y = |v: f64| TOP + PLOT_H * (1.0 - v / top_value);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="20" font-size="14">{}</text>"#,
        chart.title
    );
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{:.1}" x2="{LEFT}" y2="{:.1}" stroke="#000"/>"##,
        TOP,
        TOP + PLOT_H
    );
    for i in 0..=4 {
        let v = top_value * f64::from(i) / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 4.0,
            y(v) + 4.0
        );
    }
    for (g, ty) in table.types.iter().enumerate() {
        let x0 = LEFT + GAP / 2.0 + group_w * g as f64;
        for (m, model) in table.models.iter().enumerate() {
            let Some(&v) = table.values.get(&(ty.clone(), model.clone())) else {
                continue;
            };
            let x = x0 + BAR * m as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{ty} {model}: {v:.3}</title></rect>"#,
                y(v),
                BAR - 2.0,
                TOP + PLOT_H - y(v),
                PALETTE[m % PALETTE.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{ty}</text>"#,
            x0 + BAR * table.models.len() as f64 / 2.0,
            TOP + PLOT_H + 16.0
        );
    }
    let right = LEFT + group_w * table.types.len() as f64;
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{ry:.1}" x2="{right:.1}" y2="{ry:.1}" stroke="#333" stroke-dasharray="6 3"/>"##,
        ry = y(chart.reference)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">reference {:.2}</text>"#,
        right + 4.0,
        y(chart.reference) + 4.0,
        chart.reference
    );
    for (m, model) in table.models.iter().enumerate() {
        let ly = TOP + 16.0 * m as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{ly:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{model}</text>"#,
            right + 4.0,
            PALETTE[m % PALETTE.len()],
            right + 18.0,
            ly + 9.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes one chart per metric into `<report>/plots`; returns their paths.
pub fn plot_report(report_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let source = report_dir.join("aggregate.csv");
    if !source.is_file() {
        return Err(CliError::Report {
            path: source,
            reason: "not found; run `mobisim run` first".into(),
        });
    }
    let out_dir = report_dir.join("plots");
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut written = Vec::new();
    for chart in &CHARTS {
        let table = read_table(&source, chart.column)?;
        let path = out_dir.join(chart.file);
        write_file(&path, render(chart, &table))?;
        written.push(path);
    }
    Ok(written)
}
