//! Machine-checkable rewrite traces shared by the correspondence engine
//! and the inverse direction.

use serde::Serialize;
use std::fmt;

/// One rewrite step: the rule that fired, the algebraic law justifying it,
/// and the full before/after states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: &'static str,
    pub law: &'static str,
    pub before: String,
    pub after: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {} [{}] : {} ==> {}", self.rule, self.law, self.before, self.after)
    }
}

/// An ordered list of rewrite steps from an input state to an output state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn record(&mut self, rule: &'static str, law: &'static str, before: String, after: String) {
        self.steps.push(TraceStep { rule, law, before, after });
    }

    /// Replays the trace: checks that each step picks up exactly where the
    /// previous one left off and returns the final state. `start` must be
    /// the state the first step fired on.
    pub fn replay(&self, start: &str) -> Result<String, ReplayError> {
        let mut state = start.to_string();
        for (i, step) in self.steps.iter().enumerate() {
            if step.before != state {
                return Err(ReplayError { step: i, expected: state, found: step.before.clone() });
            }
            state = step.after.clone();
        }
        Ok(state)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub step: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trace step {} does not continue the previous state: expected `{}`, found `{}`",
            self.step, self.expected, self.found
        )
    }
}

impl std::error::Error for ReplayError {}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}
