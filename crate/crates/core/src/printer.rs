//! The forcing printer: renders a value completely, evaluating suspended
//! list components on the way, within the configured truncation limits.

use alloc::string::String;
use core::fmt::Write;

use crate::builtins::closure_label;
use crate::error::Error;
use crate::eval::Interpreter;
use crate::value::Value;

impl Interpreter {
    pub fn render(&mut self, v: &Value) -> Result<String, Error> {
        let mut out = String::new();
        self.render_into(&mut out, v, 0)?;
        Ok(out)
    }

    fn render_into(&mut self, out: &mut String, v: &Value, nesting: usize) -> Result<(), Error> {
        match v {
            Value::Pair(p) => {
                if nesting >= self.config.print.nesting {
                    out.push_str("...");
                    return Ok(());
                }
                out.push('(');
                let mut cell = p.clone();
                let mut printed = 0;
                loop {
                    let head = self.force_cell(&cell.head)?;
                    self.render_into(out, &head, nesting + 1)?;
                    printed += 1;
                    match self.force_cell(&cell.tail)? {
                        Value::Nil => break,
                        Value::Pair(next) => {
                            if printed >= self.config.print.elements {
                                out.push_str(" ...");
                                break;
                            }
                            out.push(' ');
                            cell = next;
                        }
                        other => {
                            return Err(Error::Type(alloc::format!(
                                "cannot print a list ending in a {}",
                                other.type_name()
                            )))
                        }
                    }
                }
                out.push(')');
            }
            Value::Closure(sid, _) => out.push_str(&closure_label(&self.structs.get(*sid).name)),
            other => {
                let _ = write!(out, "{}", other);
            }
        }
        Ok(())
    }
}
