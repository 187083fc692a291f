//! Deterministic SVG renderings of the law fit and the model-length comparison.

use std::fmt::Write;

use evfield::lawfit::DecaySeries;
use evfield::physics::ModelCurveSet;

use crate::error::{CliError, CliResult};
use crate::experiment::RunReport;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn unit(&self, v: f64) -> f64 {
        if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
            (a..=b).map(|k| 10f64.powi(k)).collect()
        } else {
            let step = nice_step((self.hi - self.lo) / 5.0);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last).map(|k| k as f64 * step).collect()
        }
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Plot {
    x: Axis,
    y: Axis,
    svg: String,
}

impl Plot {
    fn new(x: Axis, y: Axis, config_sha256: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, "<!-- config_sha256={config_sha256} -->");
        let _ = writeln!(svg, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="18" text-anchor="middle">{title}</text>"#,
            W / 2.0
        );
        let mut p = Self { x, y, svg };
        p.frame(x_label, y_label);
        p
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + self.x.unit(x) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - self.y.unit(y) * (H - TOP - BOTTOM)
    }

    fn frame(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let _ = writeln!(
            self.svg,
            r#"<rect class="frame" x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for t in self.x.ticks() {
            let x = self.px(t);
            let _ = writeln!(
                self.svg,
                r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
                y0 + 5.0
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                tick_label(t, self.x.log)
            );
        }
        for t in self.y.ticks() {
            let y = self.py(t);
            let _ = writeln!(
                self.svg,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                self.svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                y + 4.0,
                tick_label(t, self.y.log)
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
            (x0 + x1) / 2.0,
            H - 12.0
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );
    }

    fn curve(&mut self, class: &str, style: &str, pts: impl IntoIterator<Item = (f64, f64)>) {
        let coords: Vec<String> = pts
            .into_iter()
            .filter(|&(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            self.svg,
            r#"<polyline class="curve {class}" points="{}" fill="none" {style}/>"#,
            coords.join(" ")
        );
    }

    fn point(&mut self, x: f64, y: f64, err: Option<f64>) {
        let (cx, cy) = (self.px(x), self.py(y));
        if let Some(e) = err {
            let _ = writeln!(
                self.svg,
                r#"<line class="errorbar" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
                self.py(y + e),
                self.py((y - e).max(self.y.lo))
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<circle class="data" cx="{cx:.2}" cy="{cy:.2}" r="4" fill="black"/>"#
        );
    }

    fn legend(&mut self, row: usize, text: &str, style: &str) {
        let y = TOP + 16.0 + 16.0 * row as f64;
        let x = W - RIGHT - 150.0;
        let _ = writeln!(
            self.svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" {style}/>"#,
            x + 24.0
        );
        let _ = writeln!(
            self.svg,
            r#"<text x="{:.2}" y="{:.2}">{text}</text>"#,
            x + 30.0,
            y + 4.0
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

/// x_i against ΔE with error bars and the fitted ħv/ΔE curve.
pub fn fig4a(series: &DecaySeries, hbar_v: f64, config_sha256: &str) -> CliResult<String> {
    let pts = series.points();
    if pts.is_empty() {
        return Err(CliError::Input("cannot plot an empty series".into()));
    }
    let e_max = pts.iter().map(|p| p.delta_e_ev).fold(0.0, f64::max) * 1.05;
    let y_max = pts.iter().map(|p| p.x_i_nm + p.sigma_nm).fold(0.0, f64::max) * 1.1;
    let mut plot = Plot::new(
        Axis {
            lo: 0.0,
            hi: e_max,
            log: false,
        },
        Axis {
            lo: 0.0,
            hi: y_max,
            log: false,
        },
        config_sha256,
        &format!("x_i(ΔE) = ħv/ΔE, ħv = {hbar_v:.2} eV·nm"),
        "energy loss ΔE (eV)",
        "decay length x_i (nm)",
    );
    let e_min = (hbar_v / y_max).max(e_max / 1000.0);
    let curve = (0..=200).map(|i| {
        let e = e_min * (e_max / e_min).powf(f64::from(i) / 200.0);
        (e, hbar_v / e)
    });
    plot.curve("fit", r#"stroke="black" stroke-width="2""#, curve);
    for p in pts {
        plot.point(p.delta_e_ev, p.x_i_nm, Some(p.sigma_nm));
    }
    plot.legend(0, "fit ħv/ΔE", r#"stroke="black" stroke-width="2""#);
    Ok(plot.finish())
}

/// Model lengths against 1/ΔE on log-log axes with the measured decay lengths.
pub fn fig4b(curves: &ModelCurveSet, series: &DecaySeries, config_sha256: &str) -> CliResult<String> {
    if curves.is_empty() || series.is_empty() {
        return Err(CliError::Input("cannot plot empty curves or series".into()));
    }
    let inv: Vec<f64> = curves.grid.iter().map(|e| 1.0 / e.value()).collect();
    let columns = [
        (
            "l_s",
            &curves.l_s,
            r#"stroke="black" stroke-width="2.5""#,
            "spatial self-coherence l_s",
        ),
        (
            "l_e",
            &curves.l_e,
            r#"stroke="gray" stroke-width="1.5" stroke-dasharray="6 3""#,
            "evanescent l_e",
        ),
        (
            "l_t",
            &curves.l_t,
            r#"stroke="black" stroke-dasharray="2 3""#,
            "tunneling l_t",
        ),
        (
            "x_ic",
            &curves.x_ic,
            r#"stroke="gray" stroke-width="1""#,
            "light-speed x_ic",
        ),
        (
            "x_i_fit",
            &curves.x_i_fit,
            r#"stroke="black" stroke-width="1""#,
            "fitted x_i",
        ),
    ];
    let all = columns
        .iter()
        .flat_map(|c| c.1.iter().map(|v| v.value()))
        .chain(series.points().iter().map(|p| p.x_i_nm))
        .filter(|v| *v > 0.0);
    let (lo, hi) = all.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let x_lo = inv.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = inv.iter().copied().fold(0.0, f64::max);
    let mut plot = Plot::new(
        Axis {
            lo: 10f64.powf(x_lo.log10().floor()),
            hi: 10f64.powf(x_hi.log10().ceil()),
            log: true,
        },
        Axis {
            lo: 10f64.powf(lo.log10().floor()),
            hi: 10f64.powf(hi.log10().ceil()),
            log: true,
        },
        config_sha256,
        "model lengths versus reciprocal energy loss",
        "1/ΔE (1/eV)",
        "length (nm)",
    );
    for (row, (class, values, style, label)) in columns.iter().enumerate() {
        plot.curve(
            class,
            style,
            inv.iter().zip(values.iter()).map(|(&x, v)| (x, v.value())),
        );
        plot.legend(row, label, style);
    }
    for p in series.points() {
        plot.point(1.0 / p.delta_e_ev, p.x_i_nm, None);
    }
    Ok(plot.finish())
}

/// Both figures of a complete run.
pub fn emit_plots(report: &RunReport) -> CliResult<(String, String)> {
    if report.energies.is_empty() {
        return Err(CliError::Input("report has no per-energy results".into()));
    }
    let series = crate::experiment::series_of(&report.energies)?;
    let hash = &report.provenance.config_sha256;
    Ok((
        fig4a(&series, report.lawfit.hbar_v, hash)?,
        fig4b(&report.curves, &series, hash)?,
    ))
}
