use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use super::{Backend, BackendError, BackendResponse, GenerationParams};

/// How a [`MockBackend`] picks its answer.
#[derive(Debug, Clone)]
pub enum MockScript {
    /// Answers in order, cycling. Order follows call order, so use a single
    /// worker when the mapping from pair to answer matters.
    Sequence(Vec<String>),
    /// Answer keyed by the exact prompt, with a fallback for unknown prompts.
    ByPrompt {
        answers: HashMap<String, String>,
        default: String,
    },
    /// Pseudo-random choice derived from a hash of the seed and the prompt,
    /// independent of call order.
    Hashed { seed: u64, choices: Vec<String> },
}

impl MockScript {
    pub fn constant(answer: &str) -> Self {
        MockScript::Sequence(vec![answer.to_owned()])
    }
}

/// Scripted in-process backend with call accounting and fault injection.
pub struct MockBackend {
    id: String,
    script: MockScript,
    latency: Option<f64>,
    delay: Option<Duration>,
    fail_first: usize,
    fail_after: Option<usize>,
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        Self {
            id: "mock".into(),
            script,
            latency: None,
            delay: None,
            fail_first: 0,
            fail_after: None,
            calls: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Reports this latency instead of the measured one.
    pub fn with_latency(mut self, seconds: f64) -> Self {
        self.latency = Some(seconds);
        self
    }

    /// Sleeps this long inside every call.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    /// The first `n` calls fail with HTTP 500.
    pub fn failing_first(mut self, n: usize) -> Self {
        self.fail_first = n;
        self
    }

    /// Every call after the first `n` fails with a transport error, as if
    /// the server went away mid-run.
    pub fn failing_after(mut self, n: usize) -> Self {
        self.fail_after = Some(n);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Highest number of simultaneous calls observed.
    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    fn answer(&self, call: usize, prompt: &str) -> String {
        match &self.script {
            MockScript::Sequence(answers) if answers.is_empty() => String::new(),
            MockScript::Sequence(answers) => answers[call % answers.len()].clone(),
            MockScript::ByPrompt { answers, default } => {
                answers.get(prompt).unwrap_or(default).clone()
            }
            MockScript::Hashed { choices, .. } if choices.is_empty() => String::new(),
            MockScript::Hashed { seed, choices } => {
                let digest = Sha256::new()
                    .chain_update(seed.to_le_bytes())
                    .chain_update(prompt.as_bytes())
                    .finalize();
                let mut head = [0u8; 8];
                head.copy_from_slice(&digest[..8]);
                choices[(u64::from_le_bytes(head) % choices.len() as u64) as usize].clone()
            }
        }
    }
}

struct InFlight<'a>(&'a AtomicUsize);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

impl Backend for MockBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str, _params: &GenerationParams) -> Result<BackendResponse, BackendError> {
        let call = self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        let _guard = InFlight(&self.in_flight);
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);

        let start = Instant::now();
        if let Some(delay) = self.delay {
            thread::sleep(delay);
        }
        if call < self.fail_first {
            return Err(BackendError::Status {
                status: 500,
                body: "injected failure".into(),
            });
        }
        if self.fail_after.is_some_and(|n| call >= n) {
            return Err(BackendError::Transport("injected disconnect".into()));
        }
        let raw_text = self.answer(call, prompt);
        let measured = start.elapsed().as_secs_f64();
        Ok(BackendResponse {
            raw_text,
            latency_seconds: self.latency.unwrap_or(measured),
            backend_id: self.id.clone(),
            cached: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_answer() {
        let mock = MockBackend::new(MockScript::Sequence(vec!["support".into()]));
        let r = mock.complete("anything", &GenerationParams::default()).unwrap();
        assert_eq!(r.raw_text, "support");
        assert!(r.latency_seconds >= 0.0);
        assert!(!r.cached);
        assert_eq!(r.backend_id, "mock");
    }

    #[test]
    fn sequence_cycles() {
        let mock = MockBackend::new(MockScript::Sequence(vec!["a".into(), "b".into()]));
        let p = GenerationParams::default();
        let got: Vec<_> = (0..3).map(|_| mock.complete("x", &p).unwrap().raw_text).collect();
        assert_eq!(got, ["a", "b", "a"]);
        assert_eq!(mock.calls(), 3);
    }

    #[test]
    fn hashed_is_order_independent() {
        let script = MockScript::Hashed {
            seed: 7,
            choices: vec!["support".into(), "attack".into()],
        };
        let a = MockBackend::new(script.clone());
        let b = MockBackend::new(script);
        let p = GenerationParams::default();
        let prompts: Vec<String> = (0..20).map(|i| format!("prompt {i}")).collect();
        let fwd: Vec<_> = prompts.iter().map(|q| a.complete(q, &p).unwrap().raw_text).collect();
        let mut rev: Vec<_> = prompts.iter().rev().map(|q| b.complete(q, &p).unwrap().raw_text).collect();
        rev.reverse();
        assert_eq!(fwd, rev);
        assert!(fwd.iter().any(|x| x == "support") && fwd.iter().any(|x| x == "attack"));
    }

    #[test]
    fn scripted_latency_is_reported_exactly() {
        let mock = MockBackend::new(MockScript::constant("attack")).with_latency(0.25);
        let r = mock.complete("x", &GenerationParams::default()).unwrap();
        assert_eq!(r.latency_seconds, 0.25);
    }

    #[test]
    fn fail_after() {
        let mock = MockBackend::new(MockScript::constant("attack")).failing_after(1);
        let p = GenerationParams::default();
        assert!(mock.complete("x", &p).is_ok());
        assert!(matches!(mock.complete("x", &p), Err(BackendError::Transport(_))));
    }
}
