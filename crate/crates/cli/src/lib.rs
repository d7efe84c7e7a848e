//! `vdse` command-line front-end: parse, validate, analyse and export
//! scenario files.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use vdse::analysis::{self, PathList, PathMode, PathOptions, DEFAULT_MAX_LEN};
use vdse::export::{self, ExportFormat, ExportOptions};
use vdse::{builtin_schema, bundled, dsl, validate, InstanceGraph, Severity};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ValidationErrors = 1,
    ParseError = 2,
    Usage = 3,
    Io = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Parser)]
#[command(
    name = "vdse",
    version,
    about = "Analyse data flows in vehicle-centric scenario graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario against the type graph.
    Validate {
        /// Scenario file, or `@uber` / `@speeding` for a bundled scenario.
        file: String,
        #[arg(long)]
        json: bool,
        #[arg(long, requires = "json")]
        pretty: bool,
    },
    /// List data-flow paths between two entities.
    Paths {
        file: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
        max_len: usize,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
        /// Let paths continue through intermediate persons.
        #[arg(long)]
        relay_through_persons: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, requires = "json")]
        pretty: bool,
    },
    /// Where a person's data can end up.
    Exposure {
        file: String,
        #[arg(long)]
        person: String,
        #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
        max_len: usize,
        #[arg(long)]
        relay_through_persons: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, requires = "json")]
        pretty: bool,
    },
    /// Render the scenario graph as DOT or JSON.
    Export {
        file: String,
        #[arg(long, value_enum)]
        format: Format,
        /// Add package ids to flow labels.
        #[arg(long)]
        show_packages: bool,
        /// Highlight the strict paths `<from>:<to>`; repeatable.
        #[arg(long, value_name = "FROM:TO")]
        highlight: Vec<String>,
        #[arg(long)]
        pretty: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Print the built-in entity-type graph.
    Schema {
        #[arg(long, value_enum, default_value_t = SchemaFormat::Text)]
        format: SchemaFormat,
    },
    /// Rewrite a scenario file in canonical form.
    Fmt { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Lineage,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaFormat {
    Dot,
    Text,
}

/// A failed command: its exit status and the diagnostic to print.
struct Failure(ExitStatus, String);

type CmdResult = Result<ExitStatus, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(ExitStatus::Usage, format!("error: {msg}"))
}

fn io(msg: impl std::fmt::Display) -> Failure {
    Failure(ExitStatus::Io, format!("error: {msg}"))
}

/// Runs the CLI with `args` (including the program name), writing results
/// to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    ExitStatus::Success
                }
                _ => {
                    let _ = write!(err, "{text}");
                    ExitStatus::Usage
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(status) => status,
        Err(Failure(status, msg)) => {
            let _ = writeln!(err, "{msg}");
            status
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Validate { file, json, pretty } => cmd_validate(&file, json, pretty, out, err),
        Command::Paths {
            file,
            from,
            to,
            max_len,
            mode,
            relay_through_persons,
            json,
            pretty,
        } => {
            let opts = PathOptions::default()
                .max_len(max_len)
                .relay_through_persons(relay_through_persons)
                .mode(match mode {
                    Mode::Strict => PathMode::Strict,
                    Mode::Lineage => PathMode::Lineage,
                });
            cmd_paths(&file, &from, &to, &opts, json, pretty, out)
        }
        Command::Exposure {
            file,
            person,
            max_len,
            relay_through_persons,
            json,
            pretty,
        } => {
            let opts = PathOptions::default()
                .max_len(max_len)
                .relay_through_persons(relay_through_persons);
            cmd_exposure(&file, &person, &opts, json, pretty, out)
        }
        Command::Export {
            file,
            format,
            show_packages,
            highlight,
            pretty,
            output,
        } => cmd_export(
            &file,
            format,
            show_packages,
            &highlight,
            pretty,
            output.as_deref(),
            out,
        ),
        Command::Schema { format } => {
            let schema = builtin_schema();
            let text = match format {
                SchemaFormat::Dot => schema.to_dot(),
                SchemaFormat::Text => schema.to_text(),
            };
            emit(out, &text)
        }
        Command::Fmt { file } => cmd_fmt(&file),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).map_err(io)?;
    if !text.ends_with('\n') {
        out.write_all(b"\n").map_err(io)?;
    }
    Ok(ExitStatus::Success)
}

fn read_source(file: &str) -> Result<(String, String), Failure> {
    if let Some(name) = file.strip_prefix('@') {
        let text = bundled::source(name).ok_or_else(|| {
            usage(format!(
                "no bundled scenario named `{name}` (try @uber or @speeding)"
            ))
        })?;
        return Ok((file.to_string(), text.to_string()));
    }
    let text = fs::read_to_string(file).map_err(|e| io(format!("cannot read {file}: {e}")))?;
    Ok((file.to_string(), text))
}

fn load(file: &str) -> Result<InstanceGraph, Failure> {
    let (name, text) = read_source(file)?;
    dsl::parse(&text).map_err(|e| Failure(ExitStatus::ParseError, e.render(&name)))
}

fn cmd_validate(
    file: &str,
    json: bool,
    pretty: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let g = load(file)?;
    let report = validate(builtin_schema(), &g);
    for w in report.warnings() {
        writeln!(err, "warning[{}] {}: {}", w.code, w.subject, w.message).map_err(io)?;
    }
    if json {
        emit(out, &export::report_to_json(&report, pretty))?;
    } else {
        let mut text = String::new();
        for e in report.errors() {
            text.push_str(&format!("error[{}] {}: {}\n", e.code, e.subject, e.message));
        }
        let errors = report.errors().count();
        let warnings = report.warnings().count();
        text.push_str(&format!(
            "scenario `{}`: {} error{}, {} warning{}\n",
            report.scenario,
            errors,
            if errors == 1 { "" } else { "s" },
            warnings,
            if warnings == 1 { "" } else { "s" },
        ));
        emit(out, &text)?;
    }
    Ok(
        if report
            .violations
            .iter()
            .any(|v| v.severity == Severity::Error)
        {
            ExitStatus::ValidationErrors
        } else {
            ExitStatus::Success
        },
    )
}

fn cmd_paths(
    file: &str,
    from: &str,
    to: &str,
    opts: &PathOptions,
    json: bool,
    pretty: bool,
    out: &mut dyn Write,
) -> CmdResult {
    // Argument-only checks come before reading the file.
    if from == to {
        return Err(usage(vdse::AnalysisError::SameEndpoints(from.to_string())));
    }
    if opts.max_len == 0 {
        return Err(usage(vdse::AnalysisError::ZeroMaxLen));
    }
    let g = load(file)?;
    let paths = analysis::enumerate_paths(&g, from, to, opts).map_err(usage)?;
    if json {
        return emit(out, &export::paths_to_json(from, to, &paths, pretty));
    }
    let mut text = String::new();
    match &paths {
        PathList::Strict(list) => {
            for (i, p) in list.iter().enumerate() {
                text.push_str(&format!(
                    "p{}: ({})  {}\n",
                    i + 1,
                    p.flows.join(", "),
                    p.nodes.join(" -> ")
                ));
            }
        }
        PathList::Lineage(list) => {
            for (i, t) in list.iter().enumerate() {
                text.push_str(&format!(
                    "t{}: ({})  packages {}\n",
                    i + 1,
                    t.flows.join(", "),
                    t.packages.join(", ")
                ));
            }
        }
    }
    let mode = match paths {
        PathList::Strict(_) => "strict",
        PathList::Lineage(_) => "lineage",
    };
    text.push_str(&format!(
        "{} {} path{} from {from} to {to}\n",
        paths.len(),
        mode,
        if paths.len() == 1 { "" } else { "s" }
    ));
    emit(out, &text)
}

fn cmd_exposure(
    file: &str,
    person: &str,
    opts: &PathOptions,
    json: bool,
    pretty: bool,
    out: &mut dyn Write,
) -> CmdResult {
    if opts.max_len == 0 {
        return Err(usage(vdse::AnalysisError::ZeroMaxLen));
    }
    let g = load(file)?;
    let report = analysis::exposure_report_with(&g, person, opts).map_err(usage)?;
    if json {
        return emit(out, &export::report_to_json(&report, pretty));
    }
    let mut text = format!("exposure of {}\n", report.person);
    for s in &report.sinks {
        let flag = match g.entity(&s.id) {
            Some(e) if e.privacy_preserving() => " [privacy preserving]",
            _ => "",
        };
        text.push_str(&format!(
            "  {} ({}){}: {} path{}, packages {}\n",
            s.id,
            s.entity_type.code(),
            flag,
            s.paths.len(),
            if s.paths.len() == 1 { "" } else { "s" },
            s.packages.iter().cloned().collect::<Vec<_>>().join(", ")
        ));
        for p in &s.paths {
            text.push_str(&format!("    ({})\n", p.flows.join(", ")));
        }
    }
    if report.aggregation_points.is_empty() {
        text.push_str("aggregation points: none\n");
    } else {
        let points: Vec<String> = report
            .aggregation_points
            .iter()
            .map(|a| format!("{} ({})", a.id, a.path_count))
            .collect();
        text.push_str(&format!("aggregation points: {}\n", points.join(", ")));
    }
    emit(out, &text)
}

fn cmd_export(
    file: &str,
    format: Format,
    show_packages: bool,
    highlight: &[String],
    pretty: bool,
    output: Option<&FsPath>,
    out: &mut dyn Write,
) -> CmdResult {
    let format = match format {
        Format::Dot => ExportFormat::Dot,
        Format::Json => ExportFormat::Json,
    };
    if format == ExportFormat::Json && !highlight.is_empty() {
        return Err(usage(vdse::ExportError::HighlightRequiresDot));
    }
    let mut queries = Vec::new();
    for h in highlight {
        let (from, to) = h
            .split_once(':')
            .ok_or_else(|| usage(format!("--highlight expects FROM:TO, got `{h}`")))?;
        queries.push((from.to_string(), to.to_string()));
    }
    let g = load(file)?;
    let mut highlight_paths = Vec::new();
    for (from, to) in &queries {
        let paths = analysis::strict_paths(&g, from, to, &PathOptions::default()).map_err(usage)?;
        highlight_paths.extend(paths);
    }
    let opts = ExportOptions {
        format,
        show_packages,
        highlight_paths,
        pretty,
    };
    let text = export::export_graph(&g, &opts).map_err(usage)?;
    match output {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| io(format!("cannot write {}: {e}", path.display())))?;
            Ok(ExitStatus::Success)
        }
        None => emit(out, &text),
    }
}

fn cmd_fmt(file: &FsPath) -> CmdResult {
    let name = file.display().to_string();
    let text = fs::read_to_string(file).map_err(|e| io(format!("cannot read {name}: {e}")))?;
    let g = dsl::parse(&text).map_err(|e| Failure(ExitStatus::ParseError, e.render(&name)))?;
    let canonical = dsl::serialize(&g).map_err(usage)?;
    if canonical != text {
        fs::write(file, canonical).map_err(|e| io(format!("cannot write {name}: {e}")))?;
    }
    Ok(ExitStatus::Success)
}
