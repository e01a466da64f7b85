//! Checkers for free subgroups of `SL(n,R)` given by matrix generators:
//! word enumeration, URU, Morse, limit sets, Anosov expansion and Schottky
//! construction.

mod morse;
mod rays;
mod schottky;
mod uru;
mod words;

pub use morse::{morse_check, MorseOptions};
pub use rays::{
    anosov_check, limit_report, log_expansion_along, propagate_flags, sample_rays, AnosovOptions,
    BoundaryRaySample, LimitOptions, LimitReport, LimitSample, RayScheme, MAX_LETTER_SPREAD,
};
pub use schottky::{schottky_build, transvection, SchottkyInput, SchottkyOptions};
pub use uru::{uru_check, UruOptions};
pub use words::{
    count_words, enumerate_geodesics, evaluated_words, FreeGroupPresentation, Geodesics,
    ReducedWord, DEFAULT_WORD_BUDGET,
};
