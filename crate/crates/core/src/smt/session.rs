//! One solver process spoken to over SMT-LIB pipes.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use super::SmtError;

const PRELUDE: &str = "\
(set-option :print-success false)
(set-logic UFLIA)
(declare-sort List 0)
(declare-fun len (List) Int)
(declare-fun mul (Int Int) Int)
";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Answer {
    Sat,
    Unsat,
    Unknown,
}

pub struct Session {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Session {
    pub fn start(cmd: &str, timeout_ms: u64) -> Result<Self, SmtError> {
        let mut parts = cmd.split_whitespace();
        let prog = parts.next().ok_or_else(|| SmtError::Launch(cmd.to_string(), "empty command".into()))?;
        let mut child = Command::new(prog)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SmtError::Launch(cmd.to_string(), e.to_string()))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut s = Session { child, stdin, stdout };
        s.send(PRELUDE)?;
        s.send(&format!("(set-option :timeout {timeout_ms})\n"))?;
        // Make sure the process is actually answering.
        s.send("(echo \"ready\")\n")?;
        let line = s.read_line()?;
        if !line.contains("ready") {
            return Err(SmtError::Launch(cmd.to_string(), format!("unexpected reply `{line}`")));
        }
        Ok(s)
    }

    fn send(&mut self, text: &str) -> Result<(), SmtError> {
        self.stdin.write_all(text.as_bytes()).map_err(|e| SmtError::Io(e.to_string()))?;
        self.stdin.flush().map_err(|e| SmtError::Io(e.to_string()))
    }

    fn read_line(&mut self) -> Result<String, SmtError> {
        let mut line = String::new();
        let n = self.stdout.read_line(&mut line).map_err(|e| SmtError::Io(e.to_string()))?;
        if n == 0 {
            return Err(SmtError::Io("solver closed its output".into()));
        }
        Ok(line.trim().to_string())
    }

    /// Check satisfiability of `script` in a fresh assertion scope.
    pub fn check(&mut self, script: &str) -> Result<Answer, SmtError> {
        self.send(&format!("(push 1)\n{script}(check-sat)\n(pop 1)\n"))?;
        let mut error = None;
        loop {
            let line = self.read_line()?;
            match line.as_str() {
                "sat" => return error.map_or(Ok(Answer::Sat), Err),
                "unsat" => return error.map_or(Ok(Answer::Unsat), Err),
                "unknown" | "timeout" => return error.map_or(Ok(Answer::Unknown), Err),
                l if l.starts_with("(error") => {
                    error = Some(SmtError::Solver(l.to_string()));
                }
                _ => {}
            }
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
