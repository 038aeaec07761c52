//! Minimal static SVG rendering of a simulation trajectory: three stacked
//! panels (harvested energy per day, localizations per day, battery charge).
//! No display server, no dependencies; output is plain SVG 1.1.

use std::path::Path;

use crate::sim::SimulationResult;
use crate::{Error, Result};

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 180.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const PANEL_GAP: f64 = 40.0;

struct Panel<'a> {
    title: &'a str,
    color: &'a str,
    values: Vec<f64>,
    y_max_hint: Option<f64>,
}

/// Render the trajectory as a standalone SVG string.
pub fn render_simulation_svg(result: &SimulationResult) -> String {
    let panels = [
        Panel {
            title: "Harvested energy per day [J]",
            color: "#d97706",
            values: result.days.iter().map(|d| d.harvested_j).collect(),
            y_max_hint: None,
        },
        Panel {
            title: "Localizations per day",
            color: "#2563eb",
            values: result.days.iter().map(|d| f64::from(d.k_used)).collect(),
            y_max_hint: None,
        },
        Panel {
            title: "Battery charge",
            color: "#16a34a",
            values: result.days.iter().map(|d| d.battery_end).collect(),
            y_max_hint: Some(1.0),
        },
    ];

    let total_height = MARGIN_TOP + 3.0 * PANEL_HEIGHT + 3.0 * PANEL_GAP;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
         width=\"{WIDTH}\" height=\"{total_height}\" viewBox=\"0 0 {WIDTH} {total_height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let n = result.days.len().max(1);

    for (idx, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + idx as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let bottom = top + PANEL_HEIGHT;
        let y_max = panel
            .y_max_hint
            .unwrap_or_else(|| panel.values.iter().fold(0.0f64, |a, &v| a.max(v)))
            .max(1e-9);

        svg.push_str(&format!(
            "<text x=\"{MARGIN_LEFT}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
            top - 8.0,
            panel.title
        ));
        // Axes.
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{top}\" x2=\"{MARGIN_LEFT}\" y2=\"{bottom}\" \
             stroke=\"#444\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{bottom}\" x2=\"{}\" y2=\"{bottom}\" \
             stroke=\"#444\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_width
        ));
        // Y extremes.
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{:.3}</text>\n",
            MARGIN_LEFT - 6.0,
            top + 4.0,
            y_max
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{bottom}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">0</text>\n",
            MARGIN_LEFT - 6.0
        ));
        // Day labels at the ends.
        svg.push_str(&format!(
            "<text x=\"{MARGIN_LEFT}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n",
            bottom + 14.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT + plot_width,
            bottom + 14.0,
            n.saturating_sub(1)
        ));

        let mut points = String::new();
        for (i, &v) in panel.values.iter().enumerate() {
            let x = MARGIN_LEFT
                + if n > 1 {
                    plot_width * i as f64 / (n - 1) as f64
                } else {
                    plot_width / 2.0
                };
            let y = bottom - PANEL_HEIGHT * (v / y_max).clamp(0.0, 1.0);
            points.push_str(&format!("{x:.2},{y:.2} "));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
            panel.color,
            points.trim_end()
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

/// Render and write to a file.
pub fn write_simulation_svg(result: &SimulationResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_simulation_svg(result)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::TuningParams;
    use crate::energy::DeviceEnergyProfile;
    use crate::sim::run_simulation;
    use crate::trace::synth_trace;

    #[test]
    fn svg_is_well_formed_and_has_three_panels() {
        let trace = synth_trace(90, 0.02, 0.18, 45, 0.3, 4).unwrap();
        let result = run_simulation(
            &trace,
            &DeviceEnergyProfile::default(),
            &TuningParams::tuned(),
            1.0,
            24,
            24,
        )
        .unwrap();
        let svg = render_simulation_svg(&result);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("Battery charge"));
    }
}
