use std::path::{Path, PathBuf};
use std::sync::Arc;

use dpa_core::gf2::{BinaryMatrix, BitVector};
use dpa_core::pa::{AdditivePaFunction, DelayedPaSession, SessionDump};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exit::{Failure, Outcome, SUCCESS, VERIFY_FAILED};
use crate::io;

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Draw a full-rank Toeplitz PA matrix.
    Toeplitz {
        /// Input length N.
        #[arg(long)]
        n: usize,
        /// Output length N_PA.
        #[arg(long)]
        npa: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the matrix (text format) here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the N+N_PA−1 seed bits (bit-vector text format).
        #[arg(long)]
        seed_out: Option<PathBuf>,
    },
    /// Compute f(a).
    Apply {
        #[command(flatten)]
        pa: PaSource,
        /// Input bit vector (text format).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a message m′ to m ∈ f⁻¹[m′] and encrypt it with the raw key;
    /// prints the session as JSON.
    Encrypt {
        #[command(flatten)]
        pa: PaSource,
        /// Raw key a (bit-vector text format).
        #[arg(long)]
        raw_key: PathBuf,
        /// Message m′ (bit-vector text format).
        #[arg(long)]
        message: PathBuf,
        /// Seed of the uniform preimage draw.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a session and recover m′ from the ciphertext via f(a) and via a.
    Recover {
        /// Session JSON written by `encrypt`.
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A PA function given as a matrix file or as a Toeplitz seed.
#[derive(Debug, clap::Args)]
#[command(group(clap::ArgGroup::new("pa_source").required(true).args(["matrix", "toeplitz_seed"])))]
pub struct PaSource {
    /// Matrix in text format.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Toeplitz seed in bit-vector text format; needs --n and --npa.
    #[arg(long, requires_all = ["n", "npa"])]
    toeplitz_seed: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    npa: Option<usize>,
}

impl PaSource {
    fn load(&self) -> Result<AdditivePaFunction, Failure> {
        match (&self.matrix, &self.toeplitz_seed, self.n, self.npa) {
            (Some(path), _, _, _) => Ok(AdditivePaFunction::new(BinaryMatrix::from_text(
                &io::read(path)?,
            )?)?),
            (None, Some(path), Some(n), Some(npa)) => Ok(AdditivePaFunction::from_toeplitz_seed(
                &read_bits(path)?,
                npa,
                n,
            )?),
            _ => Err(Failure::config(
                "give --matrix, or --toeplitz-seed with --n and --npa",
            )),
        }
    }
}

fn read_bits(path: &Path) -> Result<BitVector, Failure> {
    Ok(BitVector::from_text(&io::read(path)?)?)
}

#[derive(Debug, Serialize)]
struct Recovery {
    n: usize,
    n_pa: usize,
    m_prime: BitVector,
    via_key: BitVector,
    via_rawkey: BitVector,
    recovered: bool,
}

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Toeplitz {
            n,
            npa,
            seed,
            out,
            seed_out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(io::resolve_seed(seed));
            let f = AdditivePaFunction::random_toeplitz(npa, n, &mut rng)?;
            if let Some(p) = &seed_out {
                let bits = f.toeplitz_seed().expect("toeplitz draw keeps its seed");
                io::emit(&bits.to_text(), Some(p))?;
            }
            io::emit(&f.matrix().to_text(), out.as_deref())?;
        }
        Command::Apply { pa, input, out } => {
            let k = pa.load()?.apply(&read_bits(&input)?)?;
            io::emit(&k.to_text(), out.as_deref())?;
        }
        Command::Encrypt {
            pa,
            raw_key,
            message,
            seed,
            out,
        } => {
            let f = Arc::new(pa.load()?);
            let prepared =
                DelayedPaSession::prepare(f, read_bits(&message)?, io::resolve_seed(seed))?;
            let session = prepared.encrypt(read_bits(&raw_key)?)?;
            io::emit_json(&session.dump(), out.as_deref())?;
        }
        Command::Recover { session, out } => {
            let dump: SessionDump = serde_json::from_str(&io::read(&session)?)
                .map_err(|e| Failure::config(format!("session {}: {e}", session.display())))?;
            let s = dump.restore()?;
            let via_key = s.recover_via_key(&s.final_key()?)?;
            let via_rawkey = s.recover_via_rawkey(s.raw_key())?;
            let recovered = &via_key == s.message() && &via_rawkey == s.message();
            let report = Recovery {
                n: dump.n,
                n_pa: dump.n_pa,
                m_prime: s.message().clone(),
                via_key,
                via_rawkey,
                recovered,
            };
            io::emit_json(&report, out.as_deref())?;
            if !recovered {
                return Ok(VERIFY_FAILED);
            }
        }
    }
    Ok(SUCCESS)
}
