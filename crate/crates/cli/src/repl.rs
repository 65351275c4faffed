//! Line-oriented read-eval-print loop.
//!
//! Input is buffered until the parentheses balance, so a form may span
//! several lines. Every complete form is evaluated and answered with
//! `= value` or an error line; errors never end the session.

use std::io::{self, BufRead, Write};

use lambdix_core::reader::{read_program, SyntaxError};
use lambdix_core::{Error, Interpreter};

use crate::error_line;

pub struct Session<W: Write> {
    pub interp: Interpreter,
    out: W,
    stats: bool,
    pending: String,
}

impl<W: Write> Session<W> {
    pub fn new(interp: Interpreter, out: W, stats: bool) -> Self {
        Session { interp, out, stats, pending: String::new() }
    }

    pub fn is_continuing(&self) -> bool {
        !self.pending.trim().is_empty()
    }

    /// Feeds one line of input, evaluating whatever forms it completes.
    pub fn feed(&mut self, line: &str) -> io::Result<()> {
        self.pending.push_str(line);
        self.pending.push('\n');
        let forms = match read_program(&self.pending) {
            Ok(forms) => forms,
            Err(SyntaxError::Unclosed(_)) | Err(SyntaxError::DanglingPrefix(..)) => return Ok(()),
            Err(e) => {
                self.pending.clear();
                return writeln!(self.out, "{}", error_line(&Error::from(e)));
            }
        };
        self.pending.clear();
        for form in forms {
            let before = self.interp.counters();
            let result = self.interp.eval_toplevel(&form).and_then(|ev| self.interp.render_evaluated(&ev));
            let printed = self.interp.take_output();
            self.out.write_all(printed.as_bytes())?;
            match result {
                Ok(v) => writeln!(self.out, "= {}", v)?,
                Err(e) => writeln!(self.out, "{}", error_line(&e))?,
            }
            if self.stats {
                let delta = self.interp.counters().delta(&before);
                let parts: Vec<String> = delta.as_pairs().iter().map(|(k, v)| format!("{}={}", k, v)).collect();
                writeln!(self.out, "; {}", parts.join(" "))?;
            }
        }
        self.out.flush()
    }

    /// Runs until end of input; `prompt` is shown before each new form.
    pub fn run<R: BufRead>(&mut self, input: R, prompt: bool) -> io::Result<()> {
        let mut lines = input.lines();
        loop {
            if prompt {
                write!(self.out, "{}", if self.is_continuing() { "  " } else { "$ " })?;
                self.out.flush()?;
            }
            match lines.next() {
                Some(line) => self.feed(&line?)?,
                None => break,
            }
        }
        if self.is_continuing() {
            let err = read_program(&self.pending).err().map(Error::from);
            if let Some(e) = err {
                writeln!(self.out, "{}", error_line(&e))?;
            }
        }
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lambdix_core::{Config, Strategy};

    fn transcript(strategy: Strategy, input: &str) -> String {
        let mut out = Vec::new();
        let mut s = Session::new(Interpreter::new(Config::new(strategy)), &mut out, false);
        s.run(input.as_bytes(), false).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn answers_each_form() {
        assert_eq!(transcript(Strategy::Need, "(de x 3)\nundefinedvar\nx\n"), "= 3\n** error - undefinedvar not defined **\n= 3\n");
    }

    #[test]
    fn forms_may_span_lines() {
        let input = "(de (from x)\n  (cons x (from (+ x 1))))\n(cadr (from 2))\n";
        assert_eq!(transcript(Strategy::Need, input), "= from\n= 3\n");
    }

    #[test]
    fn print_output_comes_before_the_answer() {
        assert_eq!(transcript(Strategy::Value, "(print 1) (+ 1 1)\n"), "1\n= 1\n= 2\n");
    }

    #[test]
    fn stray_parenthesis_is_reported_and_forgotten() {
        assert_eq!(transcript(Strategy::Value, ")\n(+ 1 2)\n"), "** error - syntax error: unexpected `)` at 1:1 **\n= 3\n");
    }

    #[test]
    fn unfinished_input_is_reported_at_the_end() {
        let out = transcript(Strategy::Value, "(+ 1\n");
        assert!(out.starts_with("** error - syntax error: unclosed"), "{}", out);
    }
}
