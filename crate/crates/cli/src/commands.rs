use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hcct::export::{self, ExportTree};
use hcct::{
    analysis, example_trace, generate_zipf_trace, skewness, write_trace, ExactCctBuilder, HcctBuilder, SymbolTable,
    TraceEvent, TraceReader, ZipfWorkloadSpec,
};

use crate::{CompareArgs, CompareFormat, ExactArgs, ExportArgs, Format, GenArgs, MineArgs, StatsArgs, StreamArgs};

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_symbols(path: Option<&Path>) -> Result<SymbolTable> {
    match path {
        Some(p) => Ok(SymbolTable::read(open_input(p)?).with_context(|| format!("in symbol file {}", p.display()))?),
        None => Ok(SymbolTable::new()),
    }
}

fn events(path: &Path) -> Result<impl Iterator<Item = hcct::Result<TraceEvent>>> {
    Ok(TraceReader::new(open_input(path)?))
}

fn emit(
    format: Format,
    header: &[(&str, String)],
    tree: &ExportTree,
    symbols: &SymbolTable,
    mut sink: Box<dyn Write>,
) -> Result<()> {
    match format {
        Format::Dot => export::write_dot(tree, symbols, &mut sink)?,
        Format::Folded => export::write_folded(tree, symbols, &mut sink)?,
        Format::JsonLines => export::write_json_lines(tree, &mut sink)?,
        Format::Report => export::write_report(header, tree, symbols, &mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

pub fn gen(args: GenArgs) -> Result<ExitCode> {
    let trace = match args.example {
        Some(n) => {
            if let Some(path) = &args.symbols_out {
                SymbolTable::example().write(open_output(Some(path))?)?;
            }
            example_trace(n)?
        }
        None => {
            let spec = ZipfWorkloadSpec::new(args.routines, args.depth, args.calls, args.skew, args.seed)?
                .with_contexts(args.contexts)?;
            generate_zipf_trace(&spec)
        }
    };
    let mut sink = open_output(args.output.as_deref())?;
    write_trace(&trace, &mut sink)?;
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn exact(args: ExactArgs) -> Result<ExitCode> {
    let symbols = load_symbols(args.out.symbols.as_deref())?;
    let mut builder = ExactCctBuilder::new();
    for event in events(&args.trace)? {
        builder.on_event(event?)?;
    }
    let cct = builder.finish();
    let tree = ExportTree::from_exact(&cct, args.phi, args.threshold.min_threshold_one);
    let header = [
        ("n_events", cct.n_events().to_string()),
        ("phi", args.phi.to_string()),
        ("exact_cct_nodes", cct.node_count().to_string()),
    ];
    emit(args.format, &header, &tree, &symbols, open_output(args.out.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

fn check_thresholds(stream: &StreamArgs) -> Result<()> {
    if stream.epsilon.is_zero() {
        bail!(hcct::Error::InvalidSpec("epsilon must be positive".into()));
    }
    if stream.phi <= stream.epsilon {
        bail!(hcct::Error::InvalidThreshold { phi: stream.phi, epsilon: stream.epsilon });
    }
    if stream.pool_capacity == Some(0) {
        bail!(hcct::Error::InvalidSpec("pool capacity must be positive".into()));
    }
    Ok(())
}

fn streaming_builder(stream: &StreamArgs) -> Result<HcctBuilder> {
    let mut builder = match stream.pool_capacity {
        Some(cap) => HcctBuilder::with_capacity(stream.epsilon, cap),
        None => HcctBuilder::new(stream.epsilon)?,
    };
    builder.set_min_threshold_one(stream.threshold.min_threshold_one);
    Ok(builder)
}

pub fn mine(args: MineArgs) -> Result<ExitCode> {
    check_thresholds(&args.stream)?;
    let symbols = load_symbols(args.out.symbols.as_deref())?;
    let mut builder = streaming_builder(&args.stream)?;
    let start = Instant::now();
    for event in events(&args.stream.trace)? {
        builder.on_event(event?)?;
    }
    builder.finish_stream();
    let phi = args.stream.phi;
    let report = if args.finalize { builder.finalize(phi)? } else { builder.query_hcct(phi)? };
    let elapsed = start.elapsed();

    eprintln!("n_events: {}", report.n_events);
    eprintln!("pool_capacity: {}", report.pool_capacity);
    eprintln!("peak_mcct_nodes: {}", report.mcct_peak_nodes);
    eprintln!("wall_time_ms: {:.3}", elapsed.as_secs_f64() * 1e3);

    let tree = ExportTree::from_report(&report);
    emit(args.format, &export::report_header(&report), &tree, &symbols, open_output(args.out.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn compare(args: CompareArgs) -> Result<ExitCode> {
    check_thresholds(&args.stream)?;
    let mut streaming = streaming_builder(&args.stream)?;
    let mut exact = ExactCctBuilder::new();
    for event in events(&args.stream.trace)? {
        let event = event?;
        streaming.on_event(event)?;
        exact.on_event(event)?;
    }
    streaming.finish_stream();
    let report = streaming.query_hcct(args.stream.phi)?;
    let accuracy = analysis::compare_with(&exact.finish(), &report, args.stream.threshold.min_threshold_one)?;

    let mut sink = open_output(args.output.as_deref())?;
    match args.format {
        CompareFormat::Report => sink.write_all(accuracy.to_text().as_bytes())?,
        CompareFormat::Json => {
            serde_json::to_writer_pretty(&mut sink, &accuracy)?;
            sink.write_all(b"\n")?;
        }
    }
    sink.flush()?;
    if accuracy.guarantees_hold() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("hcct: streaming result violates the heavy-hitter guarantees");
        Ok(ExitCode::FAILURE)
    }
}

pub fn export(args: ExportArgs) -> Result<ExitCode> {
    let symbols = load_symbols(args.out.symbols.as_deref())?;
    let tree = export::read_json_lines(open_input(&args.input)?)
        .with_context(|| format!("in tree dump {}", args.input.display()))?;
    let header = [("source", args.input.display().to_string())];
    emit(args.format, &header, &tree, &symbols, open_output(args.out.output.as_deref())?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn stats(args: StatsArgs) -> Result<ExitCode> {
    let mut builder = ExactCctBuilder::new();
    let (mut events_seen, mut depth, mut max_depth) = (0u64, 0usize, 0usize);
    for event in events(&args.trace)? {
        let event = event?;
        match event {
            TraceEvent::Call(_) => {
                depth += 1;
                max_depth = max_depth.max(depth);
            }
            TraceEvent::Return => depth -= 1,
        }
        events_seen += 1;
        builder.on_event(event)?;
    }
    let cct = builder.finish();
    let mut out = open_output(None)?;
    writeln!(out, "events: {events_seen}")?;
    writeln!(out, "n_events: {}", cct.n_events())?;
    writeln!(out, "open_calls_at_eof: {depth}")?;
    writeln!(out, "distinct_contexts: {}", cct.node_count())?;
    writeln!(out, "max_depth: {max_depth}")?;
    if cct.n_events() > 0 {
        let curve = skewness(&cct)?;
        for pct in [1, 5, 10, 20, 50] {
            writeln!(out, "top_{pct}pct_call_share: {:.6}", curve.at_percent(pct))?;
        }
        if args.curve {
            for (x, y) in &curve.points {
                writeln!(out, "curve: {x:.2} {y:.6}")?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(phi: &str, eps: &str) -> StreamArgs {
        StreamArgs {
            trace: "-".into(),
            phi: phi.parse().unwrap(),
            epsilon: eps.parse().unwrap(),
            pool_capacity: None,
            threshold: crate::ThresholdArgs { min_threshold_one: true },
        }
    }

    #[test]
    fn epsilon_must_be_below_phi() {
        let err = check_thresholds(&stream("0.1", "0.2")).unwrap_err();
        assert!(matches!(err.downcast_ref::<hcct::Error>(), Some(hcct::Error::InvalidThreshold { .. })));
        assert!(check_thresholds(&stream("0.1", "0.1")).is_err());
        assert!(check_thresholds(&stream("0.1", "0")).is_err());
        assert!(check_thresholds(&stream("0.5", "0.25")).is_ok());
    }

    #[test]
    fn capacity_override() {
        let mut s = stream("1/2", "1/4");
        s.pool_capacity = Some(3);
        assert_eq!(streaming_builder(&s).unwrap().pool().capacity(), 3);
        s.pool_capacity = None;
        assert_eq!(streaming_builder(&s).unwrap().pool().capacity(), 4);
    }
}
