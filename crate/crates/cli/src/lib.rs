//! The `gliq` command line: `check` runs inference on a file and writes the
//! report, `serve` exposes the report and rechecking over local HTTP.

pub mod args;
pub mod server;
pub mod summary;

use std::path::Path;

use gliq_core::check::{CheckError, Checker};
use gliq_core::report::{to_html, ReportDocument};

pub use args::{Cli, Command};

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Run a parsed command line and return the process exit status.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Check { file, common, json, html } => check(&file, &common, json.as_deref(), html.as_deref()),
        Command::Serve { file, common, port } => server::serve(&file, &common, port),
    }
}

fn read_source(file: &Path) -> Result<String, i32> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        EXIT_USAGE
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_USAGE
    })
}

fn check(file: &Path, common: &args::Common, json: Option<&Path>, html: Option<&Path>) -> i32 {
    let text = match read_source(file) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let options = common.options();
    let checker = match Checker::new(options.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let checked = match checker.check(&file.display().to_string(), &text, &|_| {}) {
        Ok(c) => c,
        Err(CheckError::Program(d)) => {
            eprintln!("{d}");
            return EXIT_TYPE_ERROR;
        }
        Err(CheckError::Smt(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let doc = ReportDocument::new(&checked, &options);
    if let Err(e) = doc.check_metrics() {
        log::error!("inconsistent report: {e}");
    }
    print!("{}", summary::render(&doc));
    if let Some(path) = json {
        if let Err(code) = write_file(path, &doc.to_json()) {
            return code;
        }
    }
    if let Some(path) = html {
        if let Err(code) = write_file(path, &to_html(&doc)) {
            return code;
        }
    }
    if checked.ok() {
        EXIT_OK
    } else {
        EXIT_TYPE_ERROR
    }
}
