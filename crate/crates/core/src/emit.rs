//! CSV and JSON rendering of run results.
//!
//! Numbers in CSV carry 12 significant digits, so output is byte-stable
//! across runs and platforms.

use crate::policy::PeriodRecord;
use crate::run::{Command, RunResult};
use serde::{Deserialize, Serialize};

pub const PERIOD_HEADER: &str = "t,tau,j,mu,p,w,G,B,H,l_g,l_b,l_h,welfare";
pub const FIXED_POINT_HEADER: &str = "tau,j,kind,residual";
pub const STEADY_STATE_HEADER: &str = "kind,tau,j,G,B,H,mu,welfare,consumption_total";
pub const SWEEP_HEADER: &str = "parameter,value,tau,j,kind,residual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `x` rounded to 12 significant digits, printed without exponent or
/// trailing zeros; negative zero prints as `0`.
///
/// ```
/// use green_transition::emit::fmt_num;
/// assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
/// assert_eq!(fmt_num(2.5), "2.5");
/// assert_eq!(fmt_num(-0.0), "0");
/// ```
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

fn line(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

pub fn period_csv(records: &[PeriodRecord]) -> String {
    let mut out = String::from(PERIOD_HEADER);
    out.push('\n');
    for r in records {
        let mut fields = vec![r.t.to_string()];
        fields.extend([r.tau, r.j, r.mu, r.p, r.w, r.g, r.b, r.h, r.l_g, r.l_b, r.l_h, r.welfare].map(fmt_num));
        line(&mut out, &fields);
    }
    out
}

pub fn csv(result: &RunResult) -> String {
    let s = &result.summary;
    match s.command {
        Command::Simulate | Command::Policy => period_csv(&result.records),
        Command::FixedPoints => {
            let mut out = format!("{FIXED_POINT_HEADER}\n");
            for fp in s.fixed_points.iter().flatten() {
                line(&mut out, &[fmt_num(s.tau), fmt_num(fp.j), fp.kind.as_str().to_string(), fmt_num(fp.residual)]);
            }
            out
        }
        Command::SteadyState => {
            let mut out = format!("{STEADY_STATE_HEADER}\n");
            if let Some(cmp) = &s.steady_states {
                for (name, ss) in [("green", &cmp.green), ("brown", &cmp.brown)] {
                    let mut fields = vec![name.to_string()];
                    fields.extend(
                        [cmp.tau, ss.j, ss.g, ss.b, ss.h, ss.mu, ss.welfare, ss.consumption_total].map(fmt_num),
                    );
                    line(&mut out, &fields);
                }
            }
            out
        }
        Command::Sweep => {
            let mut out = format!("{SWEEP_HEADER}\n");
            if let Some(sweep) = &s.sweep {
                for point in &sweep.points {
                    let tau = if sweep.parameter == "tau" { point.value } else { sweep.tau };
                    for fp in &point.fixed_points {
                        line(
                            &mut out,
                            &[
                                sweep.parameter.to_string(),
                                fmt_num(point.value),
                                fmt_num(tau),
                                fmt_num(fp.j),
                                fp.kind.as_str().to_string(),
                                fmt_num(fp.residual),
                            ],
                        );
                    }
                }
            }
            out
        }
    }
}

pub fn json(result: &RunResult) -> String {
    let mut out = serde_json::to_string_pretty(result).expect("run results always serialize");
    out.push('\n');
    out
}

pub fn render(result: &RunResult, format: Format) -> String {
    match format {
        Format::Csv => csv(result),
        Format::Json => json(result),
    }
}
