//! Running an external Horn solver on an SMT-LIB script.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Environment variable naming the solver command; it takes precedence over
/// a command given on the command line.
pub const SOLVER_ENV: &str = "HL_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExternalVerdict {
    Sat,
    Unsat,
    /// The solver answered `unknown`.
    Unknown,
    Timeout,
    /// The solver could not be run or gave no verdict; carries its output.
    SolverError(String),
}

impl std::fmt::Display for ExternalVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExternalVerdict::Sat => write!(f, "sat"),
            ExternalVerdict::Unsat => write!(f, "unsat"),
            ExternalVerdict::Unknown => write!(f, "unknown"),
            ExternalVerdict::Timeout => write!(f, "timeout"),
            ExternalVerdict::SolverError(e) => write!(f, "solver error: {}", e.trim()),
        }
    }
}

/// The solver command to use: `HL_SOLVER` if set and non-empty, else
/// `configured`.
pub fn solver_command(configured: Option<&str>) -> Option<String> {
    match std::env::var(SOLVER_ENV) {
        Ok(s) if !s.trim().is_empty() => Some(s),
        _ => configured.map(str::to_string).filter(|s| !s.trim().is_empty()),
    }
}

/// Classifies the first verdict line of a solver's output.
pub fn classify(output: &str) -> ExternalVerdict {
    for line in output.lines() {
        match line.trim() {
            "sat" => return ExternalVerdict::Sat,
            "unsat" => return ExternalVerdict::Unsat,
            "unknown" => return ExternalVerdict::Unknown,
            "timeout" => return ExternalVerdict::Timeout,
            _ => {}
        }
    }
    ExternalVerdict::SolverError(output.to_string())
}

/// Writes `script` to a temporary `.smt2` file and runs `command` (split on
/// whitespace) with the file path appended, killing it after `timeout`.
pub fn run_external(script: &str, command: &str, timeout: Duration) -> ExternalVerdict {
    if timeout.is_zero() {
        return ExternalVerdict::Timeout;
    }
    let mut parts = command.split_whitespace();
    let Some(program) = parts.next() else {
        return ExternalVerdict::SolverError("empty solver command".into());
    };
    let file = tempfile::Builder::new().prefix("hornlin").suffix(".smt2").tempfile();
    let mut file = match file {
        Ok(f) => f,
        Err(e) => return ExternalVerdict::SolverError(format!("cannot create script file: {e}")),
    };
    if let Err(e) = file.write_all(script.as_bytes()).and_then(|_| file.flush()) {
        return ExternalVerdict::SolverError(format!("cannot write script file: {e}"));
    }
    let child = Command::new(program)
        .args(parts)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return ExternalVerdict::SolverError(format!("cannot run `{program}`: {e}")),
    };
    let mut stdout = child.stdout.take().unwrap();
    let mut stderr = child.stderr.take().unwrap();
    let out = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return ExternalVerdict::Timeout;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => return ExternalVerdict::SolverError(e.to_string()),
        }
    }
    let out = out.join().unwrap_or_default();
    let err = err.join().unwrap_or_default();
    match classify(&out) {
        ExternalVerdict::SolverError(_) => ExternalVerdict::SolverError(format!("{out}{err}")),
        v => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_verdict_wins() {
        assert_eq!(classify("sat\n(model)\n"), ExternalVerdict::Sat);
        assert_eq!(classify("warning: x\nunsat\n"), ExternalVerdict::Unsat);
        assert!(matches!(classify("(error \"bad\")"), ExternalVerdict::SolverError(_)));
    }

    #[test]
    fn zero_timeout() {
        assert_eq!(run_external("(check-sat)", "true", Duration::ZERO), ExternalVerdict::Timeout);
    }

    #[test]
    fn missing_executable() {
        let v = run_external("(check-sat)", "/nonexistent/solver --flag", Duration::from_secs(5));
        assert!(matches!(v, ExternalVerdict::SolverError(_)));
    }

    #[test]
    fn output_is_classified() {
        // `cat` echoes the script, whose first verdict-like line is `sat`.
        let v = run_external("; header\nsat\n", "cat", Duration::from_secs(5));
        assert_eq!(v, ExternalVerdict::Sat);
    }

    #[test]
    fn slow_commands_time_out() {
        let v = run_external("", "tail -f", Duration::from_millis(100));
        assert_eq!(v, ExternalVerdict::Timeout);
    }
}
