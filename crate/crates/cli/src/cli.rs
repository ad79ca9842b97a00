//! The `joliet` command line.
//!
//! Exit codes: 0 success, 1 parse error, 2 runtime fault, 3 usage error
//! (bad arguments, unreadable files, malformed doc files).

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use joliet_core::service::{
    HoverRequest, Reply, RunRequest, Service, ServiceError, SourceRequest, DEFAULT_BUDGET_CAP,
};
use joliet_core::{parse_program, pretty_print};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_FAULT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "joliet", version, about = "Tools for a small Jolie dialect")]
pub struct Cli {
    /// Print the JSON body the HTTP service would return
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a program and print it in canonical form
    Parse { file: PathBuf },
    /// Rewrite every `foreach (x -> path)` into an indexed `for`
    Desugar { file: PathBuf },
    /// Execute `main`
    Run {
        file: PathBuf,
        /// Maximum number of statement executions
        #[arg(long, default_value_t = DEFAULT_BUDGET_CAP, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
    },
    /// Show the documentation for the word at a position
    Doc {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        line: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        col: u64,
        /// Extra categorization file; later files override earlier ones
        #[arg(long = "docs", value_name = "PATH")]
        docs: Vec<PathBuf>,
        /// Print the whole body rendered as HTML
        #[arg(long, conflicts_with = "full")]
        html: bool,
        /// Print the whole markdown body instead of the first paragraph
        #[arg(long)]
        full: bool,
    },
    /// Serve the JSON endpoints (and optionally the playground)
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Categorization file loaded at startup; repeatable
        #[arg(long = "docs", value_name = "PATH")]
        docs: Vec<PathBuf>,
        /// Directory of static playground files
        #[arg(long, value_name = "DIR")]
        playground: Option<PathBuf>,
        /// Largest step budget a client may request
        #[arg(long, default_value_t = DEFAULT_BUDGET_CAP)]
        budget_cap: u64,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn exit_code(e: &ServiceError) -> i32 {
        match e {
            ServiceError::BadRequest { .. } => EXIT_USAGE,
            ServiceError::ParseError { .. } => EXIT_PARSE,
            ServiceError::RuntimeFault { .. } => EXIT_FAULT,
        }
    }

    /// Prints `result` as JSON or through `human`, returning the exit code.
    fn finish<T: serde::Serialize + Clone>(
        &mut self,
        file: &std::path::Path,
        result: Result<T, ServiceError>,
        human: impl FnOnce(&mut dyn Write, &T) -> std::io::Result<()>,
    ) -> i32 {
        let code = result.as_ref().err().map_or(EXIT_OK, Self::exit_code);
        if self.json {
            let Reply { body, .. } = Service::respond(result);
            let _ = writeln!(self.out, "{body}");
            return code;
        }
        match result {
            Ok(v) => {
                let _ = human(self.out, &v);
            }
            Err(e) => self.report(file, &e),
        }
        code
    }

    fn report(&mut self, file: &std::path::Path, e: &ServiceError) {
        let file = file.display();
        let _ = match e {
            ServiceError::BadRequest { message } => writeln!(self.err, "joliet: {message}"),
            ServiceError::ParseError { message, .. } => writeln!(self.err, "{file}:{message}"),
            ServiceError::RuntimeFault {
                kind,
                line,
                col,
                message,
                output,
            } => {
                for l in output {
                    let _ = writeln!(self.out, "{l}");
                }
                writeln!(self.err, "{file}:{line}:{col}: {kind}: {message}")
            }
        };
    }
}

fn read_source(path: &std::path::Path) -> Result<String, ServiceError> {
    std::fs::read_to_string(path)
        .map_err(|e| ServiceError::bad_request(format!("cannot read {}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let mut io = Io {
        out,
        err,
        json: cli.json,
    };
    match cli.command {
        Command::Parse { file } => {
            let result = read_source(&file).and_then(|source| {
                let program = parse_program(&source)?;
                Ok(serde_json::json!({ "source": pretty_print(&program) }))
            });
            io.finish(&file, result, |out, v| {
                write!(out, "{}", v["source"].as_str().unwrap_or_default())
            })
        }
        Command::Desugar { file } => {
            let result = read_source(&file)
                .and_then(|source| Service::default().handle_desugar(&SourceRequest { source }));
            io.finish(&file, result, |out, r| write!(out, "{}", r.source))
        }
        Command::Run { file, budget } => {
            let service = Service::default().with_budget_cap(u64::MAX);
            let result = read_source(&file).and_then(|source| {
                service.handle_run(&RunRequest {
                    source,
                    step_budget: Some(budget),
                })
            });
            io.finish(&file, result, |out, r| {
                r.output.iter().try_for_each(|l| writeln!(out, "{l}"))
            })
        }
        Command::Doc {
            file,
            line,
            col,
            docs,
            html,
            full,
        } => {
            let result = read_source(&file).and_then(|source| {
                let doc_paths = (!docs.is_empty()).then(|| {
                    docs.iter()
                        .map(|p| p.to_string_lossy().into_owned())
                        .collect()
                });
                Service::default().handle_hover(&HoverRequest {
                    source,
                    line: line as usize,
                    col: col as usize,
                    doc_paths,
                })
            });
            let mut missing = false;
            let code = io.finish(&file, result, |out, r| {
                if !r.found {
                    missing = true;
                    return Ok(());
                }
                let body = if html {
                    &r.html
                } else if full {
                    &r.full_markdown
                } else {
                    &r.snippet
                };
                writeln!(out, "{body}")
            });
            if missing {
                let _ = writeln!(io.err, "joliet: no documentation at {line}:{col}");
            }
            code
        }
        Command::Serve {
            port,
            host,
            docs,
            playground,
            budget_cap,
        } => {
            let service = match Service::new(&docs) {
                Ok(s) => s.with_budget_cap(budget_cap),
                Err(e) => {
                    let _ = writeln!(io.err, "joliet: {e}");
                    return EXIT_USAGE;
                }
            };
            if let Some(dir) = &playground {
                if !dir.is_dir() {
                    let _ = writeln!(io.err, "joliet: {} is not a directory", dir.display());
                    return EXIT_USAGE;
                }
            }
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    let _ = writeln!(io.err, "joliet: {e}");
                    return EXIT_USAGE;
                }
            };
            let addr = SocketAddr::new(host, port);
            match runtime.block_on(crate::serve(addr, Arc::new(service), playground.as_deref())) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(io.err, "joliet: {e:#}");
                    EXIT_USAGE
                }
            }
        }
    }
}
