//! CSV and JSON encodings of result records.
//!
//! Both encodings round-trip exactly. CSV numbers carry at least ten
//! significant digits (more when needed to pin down the `f64`), optional
//! values are empty cells and vectors are `;`-separated.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::analytic::AnalyticReport;
use crate::config::SystemConfig;
use crate::error::OutputError;
use crate::sim::{SimSetup, SimStats};
use crate::sweep::{Panel, Scheme, SweepParams, SweepPoint, SweepResult, Table1, Table1Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Significant digits written for every float.
pub const MIN_SIGNIFICANT_DIGITS: usize = 10;

/// A result type with a fixed CSV layout.
pub trait Records: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];

    fn csv_rows(&self) -> Vec<Vec<String>>;

    fn from_csv_rows(rows: &[Fields]) -> Result<Self, OutputError>;
}

pub fn emit_records<R: Records>(records: &R, format: Format) -> Result<Vec<u8>, OutputError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(R::HEADER)?;
            for row in records.csv_rows() {
                writer.write_record(&row)?;
            }
            writer
                .into_inner()
                .map_err(|e| OutputError::Csv(csv::Error::from(e.into_error())))
        }
    }
}

pub fn parse_records<R: Records>(bytes: &[u8], format: Format) -> Result<R, OutputError> {
    match format {
        Format::Json => Ok(serde_json::from_slice(bytes)?),
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(bytes);
            let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
            if found != R::HEADER {
                return Err(OutputError::Header {
                    expected: R::HEADER.join(","),
                    found: found.join(","),
                });
            }
            let rows = reader
                .records()
                .enumerate()
                .map(|(i, r)| {
                    Ok(Fields {
                        row: i + 1,
                        header: R::HEADER,
                        record: r?,
                    })
                })
                .collect::<Result<Vec<_>, OutputError>>()?;
            R::from_csv_rows(&rows)
        }
    }
}

/// Shortest round-trip digits, padded to [`MIN_SIGNIFICANT_DIGITS`].
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        let zero = format!("{:.*}", MIN_SIGNIFICANT_DIGITS - 1, 0.0);
        return if x.is_sign_negative() {
            format!("-{zero}")
        } else {
            zero
        };
    }
    let shortest = format!("{x:e}");
    let (mantissa, exponent) = shortest.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let digits = mantissa.chars().filter(char::is_ascii_digit).count();
    let significant = digits.max(MIN_SIGNIFICANT_DIGITS);
    if (-5..16).contains(&exponent) {
        let decimals = (significant as i32 - 1 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.*e}", significant - 1)
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn float_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|&x| format_float(x))
        .collect::<Vec<_>>()
        .join(";")
}

/// One parsed CSV row, addressed by column name.
pub struct Fields {
    row: usize,
    header: &'static [&'static str],
    record: csv::StringRecord,
}

impl Fields {
    pub(crate) fn raw(&self, column: &'static str) -> &str {
        let i = self
            .header
            .iter()
            .position(|&c| c == column)
            .expect("column belongs to the layout");
        self.record.get(i).unwrap_or("")
    }

    pub(crate) fn bad(&self, column: &'static str) -> OutputError {
        OutputError::Field {
            row: self.row,
            column,
            value: self.raw(column).to_owned(),
        }
    }

    pub(crate) fn parse<T: std::str::FromStr>(
        &self,
        column: &'static str,
    ) -> Result<T, OutputError> {
        self.raw(column).parse().map_err(|_| self.bad(column))
    }

    pub(crate) fn optional<T: std::str::FromStr>(
        &self,
        column: &'static str,
    ) -> Result<Option<T>, OutputError> {
        match self.raw(column) {
            "" => Ok(None),
            _ => self.parse(column).map(Some),
        }
    }

    pub(crate) fn text(&self, column: &'static str) -> &str {
        self.raw(column)
    }

    pub(crate) fn float_list(&self, column: &'static str) -> Result<Vec<f64>, OutputError> {
        match self.raw(column) {
            "" => Ok(Vec::new()),
            s => s
                .split(';')
                .map(|v| v.parse().map_err(|_| self.bad(column)))
                .collect(),
        }
    }
}

fn single(rows: &[Fields]) -> Result<&Fields, OutputError> {
    match rows {
        [row] => Ok(row),
        _ => Err(OutputError::Schema(format!(
            "expected one data row, found {}",
            rows.len()
        ))),
    }
}

impl Records for AnalyticReport {
    const HEADER: &'static [&'static str] = &[
        "p", "p_s", "phi", "e_l", "e_alpha", "e_s", "e_w", "e_w2", "e_k", "e_k2", "e_y", "e_y2",
        "aaoi",
    ];

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut row = vec![
            format_float(self.p),
            format_float(self.p_s),
            float_list(&self.phi),
        ];
        row.extend(
            [
                self.e_l,
                self.e_alpha,
                self.e_s,
                self.e_w,
                self.e_w2,
                self.e_k,
                self.e_k2,
                self.e_y,
                self.e_y2,
                self.aaoi,
            ]
            .map(format_float),
        );
        vec![row]
    }

    fn from_csv_rows(rows: &[Fields]) -> Result<Self, OutputError> {
        let f = single(rows)?;
        Ok(AnalyticReport {
            p: f.parse("p")?,
            p_s: f.parse("p_s")?,
            phi: f.float_list("phi")?,
            e_l: f.parse("e_l")?,
            e_alpha: f.parse("e_alpha")?,
            e_s: f.parse("e_s")?,
            e_w: f.parse("e_w")?,
            e_w2: f.parse("e_w2")?,
            e_k: f.parse("e_k")?,
            e_k2: f.parse("e_k2")?,
            e_y: f.parse("e_y")?,
            e_y2: f.parse("e_y2")?,
            aaoi: f.parse("aaoi")?,
        })
    }
}

impl Records for SimStats {
    const HEADER: &'static [&'static str] = &[
        "protocol",
        "users",
        "frame",
        "minislots",
        "rho",
        "gamma",
        "tau",
        "horizon_frames",
        "warmup_frames",
        "replications",
        "mean_aoi",
        "ci_halfwidth",
        "mean_service",
        "mean_interdeparture",
        "mean_y",
        "mean_y2",
        "slots_measured",
        "deliveries",
        "intervals",
        "per_user_aoi",
    ];

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let (protocol, users, frame, minislots, rho, gamma, tau) = match self.setup {
            SimSetup::Fsard(c) => (
                "fsard",
                c.num_users,
                Some(c.frame_size),
                Some(c.mini_slots),
                c.arrival_prob,
                Some(c.reservation_prob),
                None,
            ),
            SimSetup::Aloha { users, rho, tau } => {
                ("aloha", users, None, None, rho, None, Some(tau))
            }
        };
        vec![vec![
            protocol.to_owned(),
            users.to_string(),
            opt_int(frame),
            opt_int(minislots),
            format_float(rho),
            opt_float(gamma),
            opt_float(tau),
            self.horizon_frames.to_string(),
            self.warmup_frames.to_string(),
            self.replications.to_string(),
            format_float(self.mean_aoi),
            format_float(self.ci_halfwidth),
            opt_float(self.mean_service),
            opt_float(self.mean_interdeparture),
            opt_float(self.mean_y),
            opt_float(self.mean_y2),
            self.slots_measured.to_string(),
            self.deliveries.to_string(),
            self.intervals.to_string(),
            float_list(&self.per_user_aoi),
        ]]
    }

    fn from_csv_rows(rows: &[Fields]) -> Result<Self, OutputError> {
        let f = single(rows)?;
        let users = f.parse("users")?;
        let rho = f.parse("rho")?;
        let setup = match f.text("protocol") {
            "fsard" => SimSetup::Fsard(SystemConfig {
                num_users: users,
                frame_size: f.parse("frame")?,
                mini_slots: f.parse("minislots")?,
                arrival_prob: rho,
                reservation_prob: f.parse("gamma")?,
            }),
            "aloha" => SimSetup::Aloha {
                users,
                rho,
                tau: f.parse("tau")?,
            },
            _ => return Err(f.bad("protocol")),
        };
        Ok(SimStats {
            setup,
            horizon_frames: f.parse("horizon_frames")?,
            warmup_frames: f.parse("warmup_frames")?,
            replications: f.parse("replications")?,
            mean_aoi: f.parse("mean_aoi")?,
            per_user_aoi: f.float_list("per_user_aoi")?,
            mean_service: f.optional("mean_service")?,
            mean_interdeparture: f.optional("mean_interdeparture")?,
            mean_y: f.optional("mean_y")?,
            mean_y2: f.optional("mean_y2")?,
            ci_halfwidth: f.parse("ci_halfwidth")?,
            slots_measured: f.parse("slots_measured")?,
            deliveries: f.parse("deliveries")?,
            intervals: f.parse("intervals")?,
        })
    }
}

/// `param1` is M and `param2` is γ for FSA-RD points; ALOHA points put τ in
/// `param1` and leave `param2` empty.
impl Records for SweepResult {
    const HEADER: &'static [&'static str] =
        &["param1", "param2", "aaoi", "ci", "source", "best", "error"];

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, point)| {
                let (param1, param2) = match point.params {
                    SweepParams::Fsard { frame_size, gamma } => {
                        (frame_size.to_string(), format_float(gamma))
                    }
                    SweepParams::Aloha { tau } => (format_float(tau), String::new()),
                };
                let source = match point.params.source() {
                    crate::sweep::Source::Analytic => "analytic",
                    crate::sweep::Source::Simulated => "simulated",
                };
                vec![
                    param1,
                    param2,
                    opt_float(point.aaoi),
                    opt_float(point.ci),
                    source.to_owned(),
                    u8::from(self.best == Some(i)).to_string(),
                    point.error.clone().unwrap_or_default(),
                ]
            })
            .collect()
    }

    fn from_csv_rows(rows: &[Fields]) -> Result<Self, OutputError> {
        let mut best = None;
        let mut points = Vec::with_capacity(rows.len());
        for (i, f) in rows.iter().enumerate() {
            let params = match f.text("source") {
                "analytic" => SweepParams::Fsard {
                    frame_size: f.parse("param1")?,
                    gamma: f.parse("param2")?,
                },
                "simulated" => SweepParams::Aloha {
                    tau: f.parse("param1")?,
                },
                _ => return Err(f.bad("source")),
            };
            match f.text("best") {
                "1" if best.is_none() => best = Some(i),
                "0" => {}
                _ => return Err(f.bad("best")),
            }
            let error = match f.text("error") {
                "" => None,
                e => Some(e.to_owned()),
            };
            points.push(SweepPoint {
                params,
                aaoi: f.optional("aaoi")?,
                ci: f.optional("ci")?,
                error,
            });
        }
        let result = SweepResult::from_points(points);
        if result.best != best {
            return Err(OutputError::Schema(format!(
                "`best` column marks {best:?} but the minimum is at {:?}",
                result.best
            )));
        }
        Ok(result)
    }
}

impl Records for Table1 {
    const HEADER: &'static [&'static str] = &[
        "panel",
        "scheme",
        "minislots",
        "users",
        "rho",
        "best_frame",
        "best_prob",
        "aaoi",
        "ci",
        "reference",
        "rel_dev",
    ];

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    match r.panel {
                        Panel::A => "a",
                        Panel::B => "b",
                    }
                    .to_owned(),
                    match r.scheme {
                        Scheme::Fsard => "fsard",
                        Scheme::Aloha => "aloha",
                    }
                    .to_owned(),
                    opt_int(r.mini_slots),
                    r.users.to_string(),
                    format_float(r.rho),
                    opt_int(r.best_frame),
                    format_float(r.best_prob),
                    format_float(r.aaoi),
                    opt_float(r.ci),
                    format_float(r.reference),
                    format_float(r.rel_dev),
                ]
            })
            .collect()
    }

    fn from_csv_rows(rows: &[Fields]) -> Result<Self, OutputError> {
        let rows = rows
            .iter()
            .map(|f| {
                Ok(Table1Row {
                    panel: match f.text("panel") {
                        "a" => Panel::A,
                        "b" => Panel::B,
                        _ => return Err(f.bad("panel")),
                    },
                    scheme: match f.text("scheme") {
                        "fsard" => Scheme::Fsard,
                        "aloha" => Scheme::Aloha,
                        _ => return Err(f.bad("scheme")),
                    },
                    mini_slots: f.optional("minislots")?,
                    users: f.parse("users")?,
                    rho: f.parse("rho")?,
                    best_frame: f.optional("best_frame")?,
                    best_prob: f.parse("best_prob")?,
                    aaoi: f.parse("aaoi")?,
                    ci: f.optional("ci")?,
                    reference: f.parse("reference")?,
                    rel_dev: f.parse("rel_dev")?,
                })
            })
            .collect::<Result<_, OutputError>>()?;
        Ok(Table1 { rows })
    }
}
