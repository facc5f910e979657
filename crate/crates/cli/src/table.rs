//! CSV emission: header row, `.` decimals, LF line endings.

use assurance_core::compare::RegionRow;
use assurance_core::finite_n::FiniteNCurve;
use assurance_core::overton::OvertonCurve;
use assurance_core::DesignCurve;

use crate::error::CliResult;

/// Shortest round-trip decimal form; scientific notation only for very large
/// or small magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes `rows` under `header` into a CSV string.
pub fn to_csv<R, I>(header: &[&str], rows: I) -> CliResult<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::CliError::Solver(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const DESIGN_HEADER: [&str; 7] = ["T", "tau", "q_high", "success_prob", "delta", "objective", "flags"];

/// Design curve rows. `flags` marks the argmax and failed thresholds.
pub fn design_csv(curve: &DesignCurve, n: u32) -> CliResult<String> {
    let rows = curve.entries.iter().map(|e| {
        let tau = num(f64::from(e.t) / f64::from(n));
        match &e.point {
            Some(p) => {
                let flag = if curve.argmax_t == Some(e.t) { "argmax" } else { "" };
                vec![
                    e.t.to_string(),
                    tau,
                    num(p.q_high),
                    num(p.success_prob),
                    num(p.delta),
                    num(p.value),
                    flag.to_string(),
                ]
            }
            None => vec![e.t.to_string(), tau, String::new(), String::new(), String::new(), String::new(), "failed".into()],
        }
    });
    to_csv(&DESIGN_HEADER, rows)
}

pub const OVERTON_HEADER: [&str; 5] = ["T", "marginal_success", "delta_pi_success", "delta_pi_failure", "psi_O"];

pub fn overton_rows(curve: &OvertonCurve) -> impl Iterator<Item = Vec<String>> + '_ {
    curve.entries.iter().map(|e| {
        let s = e.shift;
        vec![
            e.t.to_string(),
            opt(s.map(|s| s.marginal_success)),
            opt(s.map(|s| s.delta_success)),
            opt(s.map(|s| s.delta_failure)),
            opt(s.map(|s| s.psi())),
        ]
    })
}

pub fn overton_csv(curve: &OvertonCurve) -> CliResult<String> {
    to_csv(&OVERTON_HEADER, overton_rows(curve))
}

pub const REGION_HEADER: [&str; 7] = ["e", "alpha", "pi", "mu", "region", "p_A", "p_S"];

pub fn region_csv(rows: &[RegionRow]) -> CliResult<String> {
    to_csv(
        &REGION_HEADER,
        rows.iter().map(|r| {
            vec![
                num(r.e),
                num(r.alpha),
                num(r.pi),
                num(r.mu),
                r.region.as_str().to_string(),
                opt(r.p_a),
                opt(r.p_s),
            ]
        }),
    )
}

pub const FINITE_N_HEADER: [&str; 6] = ["T", "objective", "success_prob", "delta_theta", "residual", "iterations"];

pub fn finite_n_csv(curve: &FiniteNCurve) -> CliResult<String> {
    to_csv(
        &FINITE_N_HEADER,
        curve.entries.iter().map(|e| match e.point {
            Some(p) => vec![
                e.t.to_string(),
                num(p.value),
                num(p.success_prob),
                num(p.delta_theta),
                num(p.residual),
                p.iterations.to_string(),
            ],
            None => vec![e.t.to_string(), String::new(), String::new(), String::new(), String::new(), String::new()],
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0, 1e-20, 123456.789, 0.46779675522600350] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(2.0), "2.0");
    }

    #[test]
    fn csv_uses_lf_and_header() {
        let s = to_csv(&["a", "b"], [vec!["1", "x,y"]]).unwrap();
        assert_eq!(s, "a,b\n1,\"x,y\"\n");
    }
}
