//! The error protocol.
//!
//! The session runs in `C` chunks of `R` rounds with `M = 3 N0` bits per
//! round. Bob keeps a main coin game over all messages whose positions lower
//! bound the corruption each message would have needed. Each chunk opens
//! with a fixed-length prompt that selects one of three strategies:
//!
//! - Case 1 (`00 a 0*`): the two leaders differ at index `a`; Alice sends
//!   `x[a]` as every bit of the chunk.
//! - Case 2 (`01 0*`): Alice sends `ECC(x)` of length `R M` across the chunk.
//! - Case 3 (`10 s 1 0*`): `s` describes a partition separating the `D`
//!   lowest coins; Alice and Bob play a minigame on the sets, with Bob
//!   sending a class map `f` before every round.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::binary_codes::{repeat_code, repeat_code_n, CodeHandle, TwoTierCodeSpec};
use crate::bits::{ceil_log2, msg_bit, BitString, Message};
use crate::channel::{Channel, CorruptionKind};
use crate::coin_game::{CoinGameState, CoinSpace, RankPolicy};
use crate::error::ProtocolError;
use crate::partitions::{encoded_len, index_width, set_count_for_len, PartitionDescriptor};
use crate::ratio::{ceil_mul, floor_mul_nonneg, rat, Rational};

use super::params::{DeskOverrides, Mode, ProtocolKind, ProtocolParams};
use super::session::Session;
use super::transcript::{ChunkRecord, ErrorDetails, MiniRound, SessionTranscript};
use super::{cached_base_code, working_list_bound, AliceView, FeedbackProtocol};

/// Largest `|FC|` a paper-mode instance may have.
pub const PAPER_MODE_BIT_LIMIT: usize = 50_000_000;

/// Desk-mode defaults.
pub const DESK_CHUNKS: usize = 3;
pub const DESK_ROUNDS: usize = 4;

/// Bob's chunk strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prompt {
    Case1 { a: usize },
    Case2,
    Case3 { descriptor: PartitionDescriptor },
}

impl Prompt {
    pub fn case(&self) -> u8 {
        match self {
            Prompt::Case1 { .. } => 1,
            Prompt::Case2 => 2,
            Prompt::Case3 { .. } => 3,
        }
    }
}

/// Prompt length `CRL ceil(log2 k) + (CRL)^2 + 2`.
pub fn prompt_len(k: usize, crl: usize) -> usize {
    crl * index_width(k) + crl * crl + 2
}

/// Class-map frame length `2 C R L`.
pub fn frame_len(crl: usize) -> usize {
    2 * crl
}

/// Closed-form total feedback bits over `C` chunks.
pub fn closed_form_zeta(k: usize, c: usize, r: usize, l: usize) -> usize {
    let crl = c * r * l;
    c * prompt_len(k, crl) + c * r * frame_len(crl)
}

/// Closed-form feedback slot count, `C + C R`.
pub fn closed_form_rho(c: usize, r: usize) -> usize {
    c + c * r
}

/// Writes a prompt at the fixed length for `CRL = crl`.
pub fn encode_prompt(prompt: &Prompt, k: usize, crl: usize) -> Result<BitString, ProtocolError> {
    let len = prompt_len(k, crl);
    let mut s = BitString::new();
    match prompt {
        Prompt::Case1 { a } => {
            s.push(false);
            s.push(false);
            s.extend_from(&BitString::from_uint(*a as u64, index_width(k)));
        }
        Prompt::Case2 => {
            s.push(false);
            s.push(true);
        }
        Prompt::Case3 { descriptor } => {
            s.push(true);
            s.push(false);
            s.extend_from(&descriptor.encode());
            s.push(true);
        }
    }
    if s.len() > len {
        return Err(ProtocolError::InvalidParams(format!(
            "prompt of {} bits exceeds the fixed length {len}",
            s.len()
        )));
    }
    s.extend_from(&BitString::zeros(len - s.len()));
    Ok(s)
}

/// A prompt as Alice reads it. Case 3 keeps the descriptor bits and the set
/// count located by the end marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedPrompt {
    Case1 { a: usize },
    Case2,
    Case3 { s: BitString, d: usize },
    Invalid,
}

pub fn parse_prompt(prompt: &BitString, k: usize) -> ParsedPrompt {
    if prompt.len() < 2 {
        return ParsedPrompt::Invalid;
    }
    match (prompt.get(0), prompt.get(1)) {
        (false, false) => ParsedPrompt::Case1 {
            a: prompt.read_uint(2, index_width(k)) as usize,
        },
        (true, false) => {
            let Some(end) = (2..prompt.len()).rev().find(|&i| prompt.get(i)) else {
                return ParsedPrompt::Invalid;
            };
            match set_count_for_len(end - 2, k) {
                Some(d) => ParsedPrompt::Case3 {
                    s: prompt.slice(2, end),
                    d,
                },
                None => ParsedPrompt::Invalid,
            }
        }
        _ => ParsedPrompt::Case2,
    }
}

/// Two bits per set, `01`, `10`, `11` for classes 1, 2, 3, then zeros.
pub fn encode_frame(f: &[u8], crl: usize) -> BitString {
    assert!(f.len() <= crl);
    let mut s = BitString::zeros(frame_len(crl));
    for (i, &c) in f.iter().enumerate() {
        s.set(2 * i, c & 2 != 0);
        s.set(2 * i + 1, c & 1 != 0);
    }
    s
}

/// The first `d` entries of a frame. Entries other than the three class
/// codes read as class 2.
pub fn decode_frame(frame: &BitString, d: usize) -> Vec<u8> {
    (0..d)
        .map(|i| {
            let c = (u8::from(frame.get(2 * i)) << 1) | u8::from(frame.get(2 * i + 1));
            if c == 0 {
                2
            } else {
                c
            }
        })
        .collect()
}

/// Class map from minigame ranks: rank 1 is class 1, even ranks class 2 and
/// odd ranks from 3 on class 3. `order` lists set coins by rank.
pub fn class_map(order: &[u64]) -> Vec<u8> {
    let mut f = vec![0u8; order.len()];
    for (rank0, &coin) in order.iter().enumerate() {
        let rank = rank0 + 1;
        f[coin as usize] = match rank {
            1 => 1,
            r if r % 2 == 0 => 2,
            _ => 3,
        };
    }
    f
}

pub struct ErrorProtocol {
    params: ProtocolParams,
    core: Arc<CodeHandle>,
    base2: Arc<CodeHandle>,
    chunk_code: CodeHandle,
    k_main: usize,
}

impl ErrorProtocol {
    pub fn new(
        k: usize,
        eps: Rational,
        mode: Mode,
        overrides: &DeskOverrides,
    ) -> Result<Self, ProtocolError> {
        if k < 2 {
            return Err(ProtocolError::InvalidParams("k must be at least 2".into()));
        }
        let core = cached_base_code(k, eps)?;
        let l = match mode {
            Mode::Paper => core.list_bound(),
            Mode::Desk => overrides.l.unwrap_or_else(|| working_list_bound(&core)),
        };
        let (c, r) = match mode {
            Mode::Paper => {
                let c = ceil_mul(Rational::from_integer(1) / eps, 1) as usize;
                let e = *eps.numer() as f64 / *eps.denom() as f64;
                let r = (100.0 * (l as f64).ln() / e.powi(3)).ceil() as usize;
                (c, (r + r % 2).max(2))
            }
            Mode::Desk => (
                overrides.c.unwrap_or(DESK_CHUNKS),
                overrides.r.unwrap_or(DESK_ROUNDS),
            ),
        };
        Self::with_parts(core, mode, c, r, l)
    }

    /// An instance over an explicit core code with `2^k` codewords.
    pub fn with_parts(
        core: Arc<CodeHandle>,
        mode: Mode,
        c: usize,
        r: usize,
        l: usize,
    ) -> Result<Self, ProtocolError> {
        let k = core.k();
        let eps = core.eps();
        if c == 0 || l == 0 {
            return Err(ProtocolError::InvalidParams(
                "C and L must be positive".into(),
            ));
        }
        if r < 2 || !r.is_multiple_of(2) {
            return Err(ProtocolError::InvalidParams(format!(
                "R={r} must be even and at least 2"
            )));
        }
        let space = 1usize << k;
        if (c - 1) * r * l >= space {
            return Err(ProtocolError::InvalidParams(format!(
                "(C-1)RL = {} leaves no message outside the ranked list of {space}",
                (c - 1) * r * l
            )));
        }
        let n0 = core.n0();
        let m = 3 * n0;
        if mode == Mode::Paper && c * r * m > PAPER_MODE_BIT_LIMIT {
            return Err(ProtocolError::InvalidParams(format!(
                "paper constants give |FC| = {} bits (C={c}, R={r}, M={m}); use desk mode",
                c * r * m
            )));
        }
        let base2 = Arc::new(repeat_code(&core, 2)?);
        let chunk_code = repeat_code_n(&core, 3 * r)?;
        let mut params = ProtocolParams::new(ProtocolKind::Error, k, eps, mode);
        params.c = c;
        params.r = r;
        params.m = m;
        params.l = l;
        params.n0 = n0;
        Ok(Self {
            params,
            core,
            base2,
            chunk_code,
            k_main: r * l * (c + 1).max(3),
        })
    }

    pub fn core(&self) -> &CodeHandle {
        &self.core
    }

    /// The length-`RM` chunk code used in Case 2.
    pub fn chunk_code(&self) -> &CodeHandle {
        &self.chunk_code
    }

    pub fn base2(&self) -> &Arc<CodeHandle> {
        &self.base2
    }

    /// `C R L`.
    pub fn crl(&self) -> usize {
        self.params.c * self.params.r * self.params.l
    }

    /// Update size of the main coin game.
    pub fn main_capacity(&self) -> usize {
        self.k_main
    }

    /// `R M`.
    pub fn chunk_bits(&self) -> usize {
        self.params.r * self.params.m
    }

    /// Case-2 radius and default increment, `floor((1/2 - 2 eps) R M)`.
    pub fn case2_radius(&self) -> u64 {
        floor_mul_nonneg(rat(1, 2) - self.params.eps * 2, self.chunk_bits())
    }

    /// End-of-minigame default increment, `floor((1/3 - 4 eps) R M)`.
    pub fn case3_default(&self) -> u64 {
        floor_mul_nonneg(rat(1, 3) - self.params.eps * 4, self.chunk_bits())
    }

    /// Class-1 increment when the decoded list is empty,
    /// `ceil((2/3 - eps) M) - min(d2, d3)`, at least 0.
    pub fn empty_list_increment(&self, d2: usize, d3: usize) -> u64 {
        let bar = ceil_mul(rat(2, 3) - self.params.eps, self.params.m);
        (bar - d2.min(d3) as i64).max(0) as u64
    }

    /// A fresh main game.
    pub fn new_main_game(&self) -> Result<CoinGameState, ProtocolError> {
        Ok(
            CoinGameState::new(CoinSpace::Binary(self.params.k), self.k_main)?
                .with_rank_policy(RankPolicy::Bounded { margin: 3 })
                .with_increment_cap(self.chunk_bits() as u64)
                .with_log(),
        )
    }

    /// Bob's choice for chunk `t` (1-based) from the main game after `t - 1`
    /// chunks.
    pub fn choose_prompt(&self, main: &CoinGameState, t: usize) -> Result<Prompt, ProtocolError> {
        let p = &self.params;
        let crm = (p.c * self.chunk_bits()) as i128;
        let p3 = main.posx(3)? as i128;
        if 3 * p3 > crm {
            let x1 = main.xth(1)?;
            let x2 = main.xth(2)?;
            let a = (0..p.k)
                .find(|&i| msg_bit(x1, p.k, i) != msg_bit(x2, p.k, i))
                .expect("distinct leaders");
            return Ok(Prompt::Case1 { a });
        }
        let d = (t - 1) * p.r * p.l;
        if d == 0 {
            return Ok(Prompt::Case2);
        }
        let pd = main.posx(d + 1)? as i128;
        let (num, den) = (*p.eps.numer() as i128, *p.eps.denom() as i128);
        // p3 > pd - eps CRM, scaled by the denominator of eps.
        if p3 * den > pd * den - num * crm {
            return Ok(Prompt::Case2);
        }
        let ranked: Vec<Message> = main.lowest(d)?.into_iter().map(|(y, _)| y).collect();
        Ok(Prompt::Case3 {
            descriptor: PartitionDescriptor::ptdesc_relaxed(&ranked, p.k)?,
        })
    }

    fn view_for(&self, feedback: &[BitString]) -> ErrorView<'_> {
        let n = feedback.len();
        if n == 0 {
            return ErrorView::Invalid(self.params.m);
        }
        let r = self.params.r;
        let chunk = (n - 1) / (r + 1);
        let tau = ((n - 1) % (r + 1)).saturating_sub(1);
        let prompt = &feedback[chunk * (r + 1)];
        let frame = &feedback[n - 1];
        match parse_prompt(prompt, self.params.k) {
            ParsedPrompt::Case1 { a } if a < self.params.k => ErrorView::Case1 {
                k: self.params.k,
                a,
                m: self.params.m,
            },
            ParsedPrompt::Case2 => ErrorView::Case2 {
                protocol: self,
                tau,
            },
            ParsedPrompt::Case3 { s, d } => {
                let f = decode_frame(frame, d);
                match TwoTierCodeSpec::with_set_count(self.base2.clone(), s, d, f) {
                    Ok(spec) => ErrorView::Case3(Box::new(spec)),
                    Err(_) => ErrorView::Invalid(self.params.m),
                }
            }
            _ => ErrorView::Invalid(self.params.m),
        }
    }

    fn run_case1(
        &self,
        session: &mut Session<'_>,
        main: &mut CoinGameState,
        a: usize,
        rec: &mut ChunkRecord,
    ) -> Result<(), ProtocolError> {
        let k = self.params.k;
        let (x1, x2) = (main.xth(1)?, main.xth(2)?);
        let bit1 = msg_bit(x1, k, a);
        let mut b1 = 0u64;
        for _ in 0..self.params.r {
            session.send_feedback(BitString::zeros(frame_len(self.crl())));
            let view = self.view_for(session.feedback());
            let received = session.round(&view)?;
            b1 += received.values().iter().filter(|&b| b != bit1).count() as u64;
        }
        let b2 = self.chunk_bits() as u64 - b1;
        main.update(&[(x1, b1 as i64), (x2, b2 as i64)], 0)?;
        rec.a = Some(a);
        rec.b = Some((b1, b2));
        Ok(())
    }

    fn run_case2(
        &self,
        session: &mut Session<'_>,
        main: &mut CoinGameState,
        rec: &mut ChunkRecord,
    ) -> Result<(), ProtocolError> {
        let mut word = BitString::new();
        for _ in 0..self.params.r {
            session.send_feedback(BitString::zeros(frame_len(self.crl())));
            let view = self.view_for(session.feedback());
            let received = session.round(&view)?;
            word.extend_from(received.values());
        }
        let radius = self.case2_radius();
        let list = self.chunk_code.scan_within(&word, radius as usize);
        if list.len() > self.k_main {
            return Err(ProtocolError::InvalidParams(format!(
                "case-2 list of {} exceeds the main update size {}",
                list.len(),
                self.k_main
            )));
        }
        let entries: Vec<(u64, i64)> = list.iter().map(|&(y, d)| (y, d as i64)).collect();
        main.update(&entries, radius as i64)?;
        rec.list = list;
        Ok(())
    }

    fn run_case3(
        &self,
        session: &mut Session<'_>,
        main: &mut CoinGameState,
        descriptor: PartitionDescriptor,
        ranked: Vec<Message>,
        rec: &mut ChunkRecord,
    ) -> Result<(), ProtocolError> {
        let p = &self.params;
        let d = descriptor.set_count();
        let s = descriptor.encode();
        let mut mini = CoinGameState::new(CoinSpace::Range(d as u64), d)?
            .with_rank_policy(RankPolicy::Oracle)
            .with_increment_cap(p.m as u64);
        let mut named: BTreeSet<Message> = BTreeSet::new();
        for _ in 0..p.r {
            let order: Vec<u64> = mini.lowest(d)?.into_iter().map(|(c, _)| c).collect();
            let f = class_map(&order);
            session.send_feedback(encode_frame(&f, self.crl()));
            let spec =
                TwoTierCodeSpec::with_set_count(self.base2.clone(), s.clone(), d, f.clone())?;
            let view = self.view_for(session.feedback());
            let received = session.round(&view)?;
            let m = received.values();
            let lambda = spec.scan_class1(m);
            // Distances to the shared class-2 and class-3 codewords.
            let d2 = m.distance(&spec.class_word(2));
            let d3 = m.distance(&spec.class_word(3));
            let v: Vec<u64> = f
                .iter()
                .map(|&c| match c {
                    1 => match lambda.iter().map(|&(_, dist)| dist).min() {
                        Some(best) => best as u64,
                        None => self.empty_list_increment(d2, d3),
                    },
                    2 => d2 as u64,
                    _ => d3 as u64,
                })
                .collect();
            let entries: Vec<(u64, i64)> = v
                .iter()
                .enumerate()
                .map(|(i, &x)| (i as u64, x as i64))
                .collect();
            mini.update(&entries, p.m as i64)?;
            named.extend(lambda.iter().map(|&(y, _)| y));
            rec.mini.push(MiniRound {
                f,
                lambda,
                d2,
                d3,
                v,
            });
        }
        let finals: Vec<u64> = (0..d as u64)
            .map(|i| mini.pos(i))
            .collect::<Result<_, _>>()?;
        let mut entries: Vec<(u64, i64)> = Vec::with_capacity(d + named.len());
        let listed: BTreeSet<Message> = ranked.iter().copied().collect();
        for &y in ranked
            .iter()
            .chain(named.iter().filter(|y| !listed.contains(y)))
        {
            entries.push((y, finals[descriptor.pt(y) - 1] as i64));
        }
        if entries.len() > self.k_main {
            return Err(ProtocolError::InvalidParams(format!(
                "minigame update of {} exceeds the main update size {}",
                entries.len(),
                self.k_main
            )));
        }
        main.update(&entries, self.case3_default() as i64)?;
        rec.ranked = ranked;
        rec.mini_final = finals;
        Ok(())
    }
}

enum ErrorView<'a> {
    Case1 {
        k: usize,
        a: usize,
        m: usize,
    },
    Case2 {
        protocol: &'a ErrorProtocol,
        tau: usize,
    },
    Case3(Box<TwoTierCodeSpec>),
    Invalid(usize),
}

impl AliceView for ErrorView<'_> {
    fn message(&self, x: Message) -> BitString {
        match self {
            ErrorView::Case1 { k, a, m } => BitString::constant(msg_bit(x, *k, *a), *m),
            ErrorView::Case2 { protocol, tau } => {
                let m = protocol.params.m;
                protocol.chunk_code.encode(x).slice(tau * m, (tau + 1) * m)
            }
            ErrorView::Case3(spec) => spec.encode_bits(x),
            ErrorView::Invalid(m) => BitString::zeros(*m),
        }
    }
}

impl FeedbackProtocol for ErrorProtocol {
    fn params(&self) -> &ProtocolParams {
        &self.params
    }

    fn corruption_kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn alice_view<'a>(&'a self, feedback: &[BitString]) -> Box<dyn AliceView + 'a> {
        Box::new(self.view_for(feedback))
    }

    fn run(
        &self,
        x: Message,
        channel: &mut Channel,
        seed: u64,
    ) -> Result<SessionTranscript, ProtocolError> {
        let mut session = Session::new(self, channel, x)?;
        let mut main = self.new_main_game()?;
        let mut chunks = Vec::with_capacity(self.params.c);
        for t in 1..=self.params.c {
            let prompt = self.choose_prompt(&main, t)?;
            session.send_feedback(encode_prompt(&prompt, self.params.k, self.crl())?);
            let mut rec = ChunkRecord {
                chunk: t,
                case: prompt.case(),
                ..Default::default()
            };
            match prompt {
                Prompt::Case1 { a } => self.run_case1(&mut session, &mut main, a, &mut rec)?,
                Prompt::Case2 => self.run_case2(&mut session, &mut main, &mut rec)?,
                Prompt::Case3 { descriptor } => {
                    let ranked = main.lowest((t - 1) * self.params.r * self.params.l)?;
                    let ranked = ranked.into_iter().map(|(y, _)| y).collect();
                    self.run_case3(&mut session, &mut main, descriptor, ranked, &mut rec)?
                }
            }
            chunks.push(rec);
        }
        let output = main.xth(1)?;
        let details = ErrorDetails {
            chunks,
            main_log: main.log().unwrap_or_default().to_vec(),
        };
        Ok(session.finish(self, seed, output, Some(details)))
    }

    fn alice_bits(&self) -> usize {
        self.params.c * self.chunk_bits()
    }

    fn feedback_bits(&self) -> usize {
        closed_form_zeta(self.params.k, self.params.c, self.params.r, self.params.l)
    }

    fn feedback_slots(&self) -> usize {
        closed_form_rho(self.params.c, self.params.r)
    }
}

/// Bits a Case-3 prompt needs for `d` sets, including the tag and marker.
pub fn case3_prompt_bits(d: usize, k: usize) -> usize {
    2 + encoded_len(d, k) + 1
}

/// `ceil(log2 k)`, the Case-1 index width.
pub fn case1_index_bits(k: usize) -> usize {
    ceil_log2(k as u64)
}
