//! Simulation log, its CSV form and the per-run summary metrics.

use std::io::{Read, Write};

use crate::analysis::metrics::{centroid, metric_drift_velocity};
use crate::geometry::Vec2;

/// Per-UAV values at one log step. Values that do not exist yet (no estimator
/// before dropout, no frame before the first fit) are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavRecord {
    pub position: Vec2,
    pub velocity: Vec2,
    /// The UAV runs its own estimator (after its dropout).
    pub active: bool,
    pub est_position: Vec2,
    pub est_velocity: Vec2,
    /// Latest floating-frame center in the UAV's stable frame.
    pub frame_center: Vec2,
    /// True position of the UAV in its estimation frame.
    pub true_frame_position: Vec2,
    pub command: Vec2,
    pub nees_position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub uavs: Vec<UavRecord>,
    /// Mean distance over the fixed neighbor pairs.
    pub d_nb: f64,
    pub centroid: Vec2,
    pub v_drift: Vec2,
}

impl LogRow {
    pub fn any_active(&self) -> bool {
        self.uavs.iter().any(|u| u.active)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimCounters {
    pub frame_fits: usize,
    pub frame_failures: usize,
    pub frame_holds: usize,
    pub out_of_order: usize,
    pub gated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub n_uavs: usize,
    pub pairs: Vec<(usize, usize)>,
    pub rows: Vec<LogRow>,
    pub counters: SimCounters,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    BadValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("log has no rows")]
    Empty,
}

const UAV_FIELDS: &[(&str, &str, &str)] = &[
    ("x", "m", "true world position x"),
    ("y", "m", "true world position y"),
    ("vx", "m/s", "true world velocity x"),
    ("vy", "m/s", "true world velocity y"),
    ("active", "bool", "1 once the UAV runs its own estimator"),
    ("est_x", "m", "estimated position x in the estimation frame"),
    ("est_y", "m", "estimated position y in the estimation frame"),
    ("est_vx", "m/s", "estimated velocity x"),
    ("est_vy", "m/s", "estimated velocity y"),
    ("frame_cx", "m", "floating-frame center x in the stable frame"),
    ("frame_cy", "m", "floating-frame center y in the stable frame"),
    ("true_fx", "m", "true position x in the estimation frame"),
    ("true_fy", "m", "true position y in the estimation frame"),
    ("cmd_x", "m/s", "commanded velocity x"),
    ("cmd_y", "m/s", "commanded velocity y"),
    ("nees_pos", "-", "position NEES of the focal estimate"),
];

const SWARM_FIELDS: &[(&str, &str, &str)] = &[
    ("d_nb", "m", "mean distance over the neighbor pairs fixed at t = 0"),
    ("centroid_x", "m", "swarm centroid x"),
    ("centroid_y", "m", "swarm centroid y"),
    ("v_drift_x", "m/s", "centroid velocity x"),
    ("v_drift_y", "m/s", "centroid velocity y"),
    ("v_drift", "m/s", "centroid speed"),
];

/// Nine significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn uav_column(i: usize, field: &str) -> String {
    format!("uav{i}_{field}")
}

pub fn log_columns(n_uavs: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 0..n_uavs {
        cols.extend(UAV_FIELDS.iter().map(|(f, _, _)| uav_column(i, f)));
    }
    cols.extend(SWARM_FIELDS.iter().map(|(f, _, _)| f.to_string()));
    cols
}

/// Column documentation for `log.csv` and `metrics.csv`, as CSV text.
pub fn schema_csv(n_uavs: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut push = |file: &str, column: &str, unit: &str, description: &str| {
        w.write_record([file, column, unit, description])
            .expect("writing to memory");
    };
    push("file", "column", "unit", "description");
    push("log.csv", "t", "s", "simulation time");
    for i in 0..n_uavs {
        for (f, unit, desc) in UAV_FIELDS {
            push("log.csv", &uav_column(i, f), unit, &format!("UAV {i}: {desc}"));
        }
    }
    for (f, unit, desc) in SWARM_FIELDS {
        push("log.csv", f, unit, desc);
    }
    push("metrics.csv", "metric", "-", "metric name");
    push("metrics.csv", "value", "-", "metric value");
    for (name, desc) in RunSummary::DESCRIPTIONS {
        push("metrics.csv", name, "-", desc);
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

impl SimLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(log_columns(self.n_uavs))?;
        let mut rec: Vec<String> = Vec::new();
        for row in &self.rows {
            rec.clear();
            rec.push(fmt_f64(row.t));
            for u in &row.uavs {
                for v in [u.position, u.velocity] {
                    rec.push(fmt_f64(v.x));
                    rec.push(fmt_f64(v.y));
                }
                rec.push(if u.active { "1" } else { "0" }.to_string());
                for v in [
                    u.est_position,
                    u.est_velocity,
                    u.frame_center,
                    u.true_frame_position,
                    u.command,
                ] {
                    rec.push(fmt_f64(v.x));
                    rec.push(fmt_f64(v.y));
                }
                rec.push(fmt_f64(u.nees_position));
            }
            rec.push(fmt_f64(row.d_nb));
            rec.push(fmt_f64(row.centroid.x));
            rec.push(fmt_f64(row.centroid.y));
            rec.push(fmt_f64(row.v_drift.x));
            rec.push(fmt_f64(row.v_drift.y));
            rec.push(fmt_f64(row.v_drift.norm()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Reads a log written by [`SimLog::write_csv`]. Neighbor pairs and counters
    /// are not part of the CSV and come back empty.
    pub fn read_csv<R: Read>(input: R) -> Result<SimLog, LogError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let index = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| LogError::MissingColumn(name.to_string()))
        };
        let n_uavs = (0..)
            .take_while(|&i| header.contains(&uav_column(i, "x")))
            .count();
        let col = |name: &str| index(name);
        let t_col = col("t")?;
        let uav_cols: Vec<Vec<usize>> = (0..n_uavs)
            .map(|i| {
                UAV_FIELDS
                    .iter()
                    .map(|(f, _, _)| col(&uav_column(i, f)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let swarm_cols: Vec<usize> = SWARM_FIELDS
            .iter()
            .map(|(f, _, _)| col(f))
            .collect::<Result<_, _>>()?;

        let mut rows = Vec::new();
        for (row_idx, record) in r.records().enumerate() {
            let record = record?;
            let get = |c: usize| -> Result<f64, LogError> {
                let raw = record.get(c).unwrap_or("");
                raw.trim().parse::<f64>().map_err(|_| LogError::BadValue {
                    row: row_idx,
                    column: header[c].clone(),
                    value: raw.to_string(),
                })
            };
            let v2 = |a: usize, b: usize| -> Result<Vec2, LogError> { Ok(Vec2::new(get(a)?, get(b)?)) };
            let uavs = uav_cols
                .iter()
                .map(|c| {
                    Ok(UavRecord {
                        position: v2(c[0], c[1])?,
                        velocity: v2(c[2], c[3])?,
                        active: get(c[4])? != 0.0,
                        est_position: v2(c[5], c[6])?,
                        est_velocity: v2(c[7], c[8])?,
                        frame_center: v2(c[9], c[10])?,
                        true_frame_position: v2(c[11], c[12])?,
                        command: v2(c[13], c[14])?,
                        nees_position: get(c[15])?,
                    })
                })
                .collect::<Result<Vec<_>, LogError>>()?;
            rows.push(LogRow {
                t: get(t_col)?,
                uavs,
                d_nb: get(swarm_cols[0])?,
                centroid: v2(swarm_cols[1], swarm_cols[2])?,
                v_drift: v2(swarm_cols[3], swarm_cols[4])?,
            });
        }
        Ok(SimLog {
            n_uavs,
            pairs: Vec::new(),
            rows,
            counters: SimCounters::default(),
        })
    }

    /// Recomputes the centroid and its velocity on every row.
    pub fn fill_drift(&mut self) {
        for row in &mut self.rows {
            let ps: Vec<Vec2> = row.uavs.iter().map(|u| u.position).collect();
            row.centroid = centroid(&ps);
        }
        if self.rows.len() < 2 {
            for row in &mut self.rows {
                row.v_drift = Vec2::ZERO;
            }
            return;
        }
        let cs: Vec<Vec2> = self.rows.iter().map(|r| r.centroid).collect();
        let dt = self.rows[1].t - self.rows[0].t;
        if let Ok(vs) = metric_drift_velocity(&cs, dt) {
            for (row, v) in self.rows.iter_mut().zip(vs) {
                row.v_drift = v;
            }
        }
    }

    /// Time of the first row with any UAV active.
    pub fn dropout_time(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.any_active()).map(|r| r.t)
    }

    pub fn summary(&self, steady_after: f64) -> Result<RunSummary, LogError> {
        RunSummary::from_log(self, steady_after)
    }
}

/// Scalar metrics of one run. Post-dropout quantities use rows from the first
/// active row on; steady-state ones start `steady_after` seconds later.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub dropout_time: f64,
    pub d_nb_initial: f64,
    pub d_nb_final: f64,
    pub d_nb_mean: f64,
    pub d_nb_max_ratio: f64,
    pub min_pair_distance: f64,
    pub max_pair_distance: f64,
    pub v_drift_mean_steady: f64,
    pub v_drift_max: f64,
    pub centroid_displacement: f64,
    pub frame_position_final_max: f64,
    pub estimate_final_max: f64,
    pub velocity_spread_steady: f64,
    pub velocity_spread_max_steady: f64,
    pub centroid_deviation_max: f64,
    pub nees_position_mean_steady: f64,
}

/// Length of the trailing window for the final frame-position metrics (s).
const FINAL_WINDOW: f64 = 10.0;

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NAN, f64::max)
}

fn min(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NAN, f64::min)
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

impl RunSummary {
    pub const DESCRIPTIONS: [(&'static str, &'static str); 16] = [
        ("dropout_time", "time of the first row with an active estimator (s)"),
        ("d_nb_initial", "d_nb at dropout (m)"),
        ("d_nb_final", "d_nb on the last row (m)"),
        ("d_nb_mean", "mean d_nb after dropout (m)"),
        ("d_nb_max_ratio", "max d_nb after dropout over d_nb_initial"),
        ("min_pair_distance", "smallest distance between any two UAVs after dropout (m)"),
        ("max_pair_distance", "largest distance between any two UAVs after dropout (m)"),
        ("v_drift_mean_steady", "mean centroid speed at steady state (m/s)"),
        ("v_drift_max", "largest centroid speed after dropout (m/s)"),
        ("centroid_displacement", "centroid travel from dropout to the end (m)"),
        ("frame_position_final_max", "largest per-UAV mean norm of the true frame position over the last 10 s (m)"),
        ("estimate_final_max", "largest per-UAV mean norm of the estimated position over the last 10 s (m)"),
        ("velocity_spread_steady", "mean across-UAV velocity std (worst axis) at steady state (m/s)"),
        ("velocity_spread_max_steady", "max across-UAV velocity std (worst axis) at steady state (m/s)"),
        ("centroid_deviation_max", "largest UAV distance from the centroid after dropout (m)"),
        ("nees_position_mean_steady", "mean position NEES over UAVs and steady-state rows"),
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.dropout_time,
            self.d_nb_initial,
            self.d_nb_final,
            self.d_nb_mean,
            self.d_nb_max_ratio,
            self.min_pair_distance,
            self.max_pair_distance,
            self.v_drift_mean_steady,
            self.v_drift_max,
            self.centroid_displacement,
            self.frame_position_final_max,
            self.estimate_final_max,
            self.velocity_spread_steady,
            self.velocity_spread_max_steady,
            self.centroid_deviation_max,
            self.nees_position_mean_steady,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::DESCRIPTIONS
            .iter()
            .position(|(n, _)| *n == name)
            .map(|i| self.values()[i])
    }

    pub fn from_log(log: &SimLog, steady_after: f64) -> Result<RunSummary, LogError> {
        let last = log.rows.last().ok_or(LogError::Empty)?;
        let start = log
            .rows
            .iter()
            .position(|r| r.any_active())
            .unwrap_or(0);
        let dropout_time = log.rows[start].t;
        let after = &log.rows[start..];
        let steady: Vec<&LogRow> = after
            .iter()
            .filter(|r| r.t >= dropout_time + steady_after)
            .collect();
        let tail: Vec<&LogRow> = after
            .iter()
            .filter(|r| r.t >= last.t - FINAL_WINDOW)
            .collect();

        let d_nb_initial = log.rows[start].d_nb;
        let pair_dists = |r: &LogRow| {
            let ps: Vec<Vec2> = r.uavs.iter().map(|u| u.position).collect();
            let mut ds = Vec::new();
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    ds.push(ps[i].distance(ps[j]));
                }
            }
            ds
        };
        let spread = |r: &LogRow| {
            let vx: Vec<f64> = r.uavs.iter().map(|u| u.velocity.x).collect();
            let vy: Vec<f64> = r.uavs.iter().map(|u| u.velocity.y).collect();
            std_dev(&vx).max(std_dev(&vy))
        };
        let tail_norm = |f: fn(&UavRecord) -> Vec2| {
            max((0..log.n_uavs).map(|i| mean(tail.iter().map(|r| f(&r.uavs[i]).norm()))))
        };

        Ok(RunSummary {
            dropout_time,
            d_nb_initial,
            d_nb_final: last.d_nb,
            d_nb_mean: mean(after.iter().map(|r| r.d_nb)),
            d_nb_max_ratio: max(after.iter().map(|r| r.d_nb)) / d_nb_initial,
            min_pair_distance: min(after.iter().flat_map(pair_dists)),
            max_pair_distance: max(after.iter().flat_map(pair_dists)),
            v_drift_mean_steady: mean(steady.iter().map(|r| r.v_drift.norm())),
            v_drift_max: max(after.iter().map(|r| r.v_drift.norm())),
            centroid_displacement: last.centroid.distance(log.rows[start].centroid),
            frame_position_final_max: tail_norm(|u| u.true_frame_position),
            estimate_final_max: tail_norm(|u| u.est_position),
            velocity_spread_steady: mean(steady.iter().map(|r| spread(r))),
            velocity_spread_max_steady: max(steady.iter().map(|r| spread(r))),
            centroid_deviation_max: max(
                after
                    .iter()
                    .flat_map(|r| r.uavs.iter().map(move |u| u.position.distance(r.centroid))),
            ),
            nees_position_mean_steady: mean(
                steady
                    .iter()
                    .flat_map(|r| r.uavs.iter().map(|u| u.nees_position))
                    .filter(|v| v.is_finite()),
            ),
        })
    }

    /// `metric,value` CSV.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "value"]).expect("writing to memory");
        for ((name, _), v) in Self::DESCRIPTIONS.iter().zip(self.values()) {
            w.write_record([name.to_string(), fmt_f64(v)])
                .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}
