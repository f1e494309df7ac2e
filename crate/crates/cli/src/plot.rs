use std::fmt::Write as _;
use std::path::Path;

use uavnet::model::{Scenario, Solution};

use crate::CliError;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Top view: area boundary, users, one closed loop per UAV, and a legend.
pub(crate) fn render_svg(scenario: &Scenario, sol: &Solution) -> String {
    let area = scenario.area();
    let scale = (CANVAS - 2.0 * MARGIN) / area.width.max(area.height);
    // y grows downwards in SVG
    let px = |x: f64| MARGIN + x * scale;
    let py = |y: f64| MARGIN + (area.height - y) * scale;
    let (w, h) = (area.width * scale + 2.0 * MARGIN, area.height * scale + 2.0 * MARGIN + 20.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
        px(0.0),
        py(area.height),
        area.width * scale,
        area.height * scale
    );
    for (k, u) in scenario.users().iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<g><rect x="{:.3}" y="{:.3}" width="8" height="8" fill="black"/><text x="{:.3}" y="{:.3}" font-size="11">u{k}</text></g>"#,
            px(u.x) - 4.0,
            py(u.y) - 4.0,
            px(u.x) + 6.0,
            py(u.y) - 6.0
        );
    }
    for (m, row) in sol.trajectory.rows().iter().enumerate() {
        let color = COLORS[m % COLORS.len()];
        let pts: Vec<String> = row.iter().map(|p| format!("{:.3},{:.3}", px(p.x), py(p.y))).collect();
        let _ =
            writeln!(svg, r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        let start = row[0];
        let _ = writeln!(svg, r#"<circle cx="{:.3}" cy="{:.3}" r="5" fill="{color}"/>"#, px(start.x), py(start.y));
    }
    let mut legend_x = MARGIN;
    let legend_y = h - 12.0;
    for m in 0..sol.trajectory.num_uavs() {
        let color = COLORS[m % COLORS.len()];
        let _ =
            writeln!(svg, r#"<text x="{legend_x:.1}" y="{legend_y:.1}" font-size="12" fill="{color}">UAV {m}</text>"#);
        legend_x += 60.0;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{legend_x:.1}" y="{legend_y:.1}" font-size="12">objective {:.4} bps/Hz</text>"#,
        sol.objective
    );
    svg.push_str("</svg>\n");
    svg
}

/// One row per UAV and slot: `m,n,x_m,y_m,p_m,served_user` (-1 if idle).
pub(crate) fn write_csv(path: &Path, sol: &Solution) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["m", "n", "x_m", "y_m", "p_m", "served_user"]).map_err(fail)?;
    for m in 0..sol.trajectory.num_uavs() {
        for n in 0..sol.trajectory.num_slots() {
            let q = sol.trajectory.get(m, n);
            let served = sol.schedule.get(m, n).map_or(-1, |k| k as i64);
            w.write_record([
                m.to_string(),
                n.to_string(),
                q.x.to_string(),
                q.y.to_string(),
                sol.power.get(m, n).to_string(),
                served.to_string(),
            ])
            .map_err(fail)?;
        }
    }
    w.flush().map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
