//! Sweep CSV layout.
//!
//! A table starts with `#` comment lines (tool version, seed, every fixed
//! parameter and the sweep description), then one header row, then one row
//! per grid point. Numbers carry 12 significant digits.

use std::io::Write;

use thermal_qkd::metrics::MetricsReport;
use thermal_qkd::network::ProtocolParams;
use thermal_qkd::numfmt::format_significant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = "thermal-qkd";

/// Column order of every metrics table. Downstream plotting reads these names.
pub const COLUMNS: [&str; 17] = [
    "eta1",
    "eta2",
    "eta4",
    "epsilon",
    "v_s_x",
    "v_s_p",
    "v_e",
    "n_a",
    "n_b",
    "i_ab",
    "i_be",
    "chi_be",
    "chi_ae",
    "discord_b_given_a",
    "discord_quadrature",
    "key_rate_k",
    "key_rate_k_prime",
];

pub fn num(x: f64) -> String {
    format_significant(x, 12)
}

pub fn params_echo(p: &ProtocolParams) -> String {
    [
        ("eta1", p.eta1),
        ("eta2", p.eta2),
        ("eta4", p.eta4),
        ("epsilon", p.epsilon),
        ("v_s_x", p.v_s_x),
        ("v_s_p", p.v_s_p),
        ("v_e", p.v_e),
        ("n_a", p.n_a),
        ("n_b", p.n_b),
    ]
    .iter()
    .map(|(k, v)| format!("{k}={}", num(*v)))
    .collect::<Vec<_>>()
    .join(" ")
}

pub fn row(r: &MetricsReport) -> String {
    let p = &r.params;
    let mut cells: Vec<String> = [
        p.eta1, p.eta2, p.eta4, p.epsilon, p.v_s_x, p.v_s_p, p.v_e, p.n_a, p.n_b, r.i_ab, r.i_be,
        r.chi_be, r.chi_ae, r.discord_b_given_a,
    ]
    .iter()
    .map(|v| num(*v))
    .collect();
    cells.push(r.discord_quadrature.to_string());
    cells.push(num(r.key_rate_k));
    cells.push(num(r.key_rate_k_prime));
    cells.join(",")
}

/// Writes a complete table. `comments` are extra `# ` lines after the
/// version/seed line.
pub fn write_metrics<W: Write>(
    mut w: W,
    seed: u64,
    comments: &[String],
    rows: &[MetricsReport],
) -> std::io::Result<()> {
    writeln!(w, "# {TOOL} {VERSION} seed={seed}")?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{}", COLUMNS.join(","))?;
    for r in rows {
        writeln!(w, "{}", row(r))?;
    }
    w.flush()
}
