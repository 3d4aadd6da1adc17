//! `hermq run`: one pass over a newline-delimited stream, emitting estimates
//! at a fixed cadence. Nothing but the estimator state is kept in memory.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};

use hermite_quantile::simulate::{CoverageCounter, MIN_COVERAGE_LENGTH};
use hermite_quantile::{Estimator, EstimatorConfig};
use serde::Serialize;

use crate::args::{Format, RunArgs};
use crate::Failure;

pub fn run(args: &RunArgs) -> Result<(), Failure> {
    let config = args.estimator.to_config()?;
    let input: Box<dyn BufRead> = match &args.input {
        Some(path) if path.as_os_str() != "-" => {
            Box::new(BufReader::new(File::open(path).map_err(|e| {
                Failure::Data(format!("{}: {e}", path.display()))
            })?))
        }
        _ => Box::new(io::stdin().lock()),
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut sink: Box<dyn Sink> = if args.coverage {
        Box::new(CoverageSink::new(config, &args.quantiles, args.format)?)
    } else {
        Box::new(EstimateSink::new(config, args)?)
    };

    let stats = feed(input, sink.as_mut(), &mut out)?;
    eprintln!(
        "hermq: {} observations, {} skipped",
        stats.observations, stats.skipped
    );
    if stats.observations == 0 && stats.skipped > 0 {
        return Err(Failure::Data(
            "no line could be used as an observation".into(),
        ));
    }
    sink.finish(&mut out)?;
    out.flush()?;
    Ok(())
}

struct FeedStats {
    observations: u64,
    skipped: u64,
}

/// Consumer of parsed values; `line` is the 1-based input line number.
trait Sink {
    fn observe(&mut self, x: f64, line: u64, out: &mut dyn Write) -> Result<(), Failure>;
    fn finish(&mut self, out: &mut dyn Write) -> Result<(), Failure>;
}

fn feed(
    mut input: impl BufRead,
    sink: &mut dyn Sink,
    out: &mut dyn Write,
) -> Result<FeedStats, Failure> {
    let mut stats = FeedStats {
        observations: 0,
        skipped: 0,
    };
    let mut buf = Vec::new();
    let mut line = 0u64;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line += 1;
        let text = String::from_utf8_lossy(&buf);
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => {
                sink.observe(x, line, out)?;
                stats.observations += 1;
            }
            Ok(_) => {
                eprintln!("hermq: line {line}: '{text}' is not a finite number; skipped");
                stats.skipped += 1;
            }
            Err(_) => {
                eprintln!("hermq: line {line}: cannot parse '{text}' as a number; skipped");
                stats.skipped += 1;
            }
        }
    }
    Ok(stats)
}

/// One emitted estimate; `index` is the input line of the latest observation.
#[derive(Serialize)]
struct Record {
    index: u64,
    count: u64,
    quantiles: Vec<QuantileField>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    cdf: Vec<CdfField>,
}

#[derive(Serialize)]
struct QuantileField {
    p: f64,
    value: Option<f64>,
    converged: bool,
}

#[derive(Serialize)]
struct CdfField {
    x: f64,
    value: f64,
}

/// Quantile (and optional CDF) records every `emit_every` observations.
struct EstimateSink {
    estimator: Estimator,
    quantiles: Vec<f64>,
    probes: Vec<f64>,
    emit_every: u64,
    format: Format,
    last_line: u64,
    header_written: bool,
}

impl EstimateSink {
    fn new(config: EstimatorConfig, args: &RunArgs) -> Result<Self, Failure> {
        Ok(Self {
            estimator: Estimator::new(config)?,
            quantiles: args.quantiles.clone(),
            probes: args.cdf.clone().unwrap_or_default(),
            emit_every: args.emit_every,
            format: args.format,
            last_line: 0,
            header_written: false,
        })
    }

    fn emit(&mut self, out: &mut dyn Write) -> Result<(), Failure> {
        let snap = self.estimator.snapshot()?;
        let quantiles = self
            .quantiles
            .iter()
            .map(|&p| Ok((p, snap.quantile(p)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let cdf = self
            .probes
            .iter()
            .map(|&x| Ok((x, snap.cdf_at(x)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        match self.format {
            Format::Jsonl => {
                let record = Record {
                    index: self.last_line,
                    count: snap.count(),
                    quantiles: quantiles
                        .iter()
                        .map(|(p, r)| QuantileField {
                            p: *p,
                            value: r.value,
                            converged: r.converged,
                        })
                        .collect(),
                    cdf: cdf
                        .iter()
                        .map(|&(x, value)| CdfField { x, value })
                        .collect(),
                };
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&record).map_err(Failure::data)?
                )?;
            }
            Format::Csv => {
                if !self.header_written {
                    writeln!(out, "{}", self.csv_header())?;
                    self.header_written = true;
                }
                let mut row = vec![self.last_line.to_string(), snap.count().to_string()];
                for (_, r) in &quantiles {
                    row.push(r.value.map(|v| v.to_string()).unwrap_or_default());
                    row.push(r.converged.to_string());
                }
                row.extend(cdf.iter().map(|(_, v)| v.to_string()));
                writeln!(out, "{}", row.join(","))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    fn csv_header(&self) -> String {
        let mut cols = vec!["index".to_string(), "count".to_string()];
        for p in &self.quantiles {
            cols.push(format!("q_{p}"));
            cols.push(format!("converged_{p}"));
        }
        cols.extend(self.probes.iter().map(|x| format!("cdf_{x}")));
        cols.join(",")
    }
}

impl Sink for EstimateSink {
    fn observe(&mut self, x: f64, line: u64, out: &mut dyn Write) -> Result<(), Failure> {
        self.estimator.observe(x)?;
        self.last_line = line;
        if self.estimator.count().is_multiple_of(self.emit_every) {
            self.emit(out)?;
        }
        Ok(())
    }

    fn finish(&mut self, out: &mut dyn Write) -> Result<(), Failure> {
        let count = self.estimator.count();
        if count > 0 && !count.is_multiple_of(self.emit_every) {
            self.emit(out)?;
        }
        Ok(())
    }
}

/// Out-of-sample coverage frequencies, reported once at the end.
struct CoverageSink {
    counter: CoverageCounter,
    format: Format,
}

impl CoverageSink {
    fn new(config: EstimatorConfig, quantiles: &[f64], format: Format) -> Result<Self, Failure> {
        Ok(Self {
            counter: CoverageCounter::new(config, quantiles)?,
            format,
        })
    }
}

impl Sink for CoverageSink {
    fn observe(&mut self, x: f64, _line: u64, _out: &mut dyn Write) -> Result<(), Failure> {
        Ok(self.counter.observe(x)?)
    }

    fn finish(&mut self, out: &mut dyn Write) -> Result<(), Failure> {
        let report = self.counter.report();
        if report.observations < MIN_COVERAGE_LENGTH {
            return Err(Failure::Data(format!(
                "coverage needs at least {MIN_COVERAGE_LENGTH} observations, got {}",
                report.observations
            )));
        }
        match self.format {
            Format::Jsonl => writeln!(
                out,
                "{}",
                serde_json::to_string(&report).map_err(Failure::data)?
            )?,
            Format::Csv => {
                writeln!(out, "p,frequency,below,evaluated,non_converged")?;
                for i in 0..report.quantiles.len() {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        report.quantiles[i],
                        report.frequencies[i],
                        report.below[i],
                        report.evaluated[i],
                        report.non_converged[i]
                    )?;
                }
            }
        }
        Ok(())
    }
}
