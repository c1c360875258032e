"""Attack payloads: word recovery and password-search planning.

Word recovery replays dictionary words as concatenated keystroke audio,
runs the full segment-classify pipeline, and measures character error
before and after dictionary correction.

The password planner turns a per-character top-x accuracy into an
enumeration schedule: try all candidates with zero assumed-wrong
positions first, then one, and so on. Counts use exact integer
arithmetic throughout; only probability masses are floating point.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import learn
from .audio import AudioBuffer
from .errors import ContractError
from .segment import SegmenterConfig, calibrate_threshold, detect_keystrokes


@dataclass(frozen=True)
class WordTrial:
    actual_word: str
    guessed_word: str
    top5_sets: tuple          # per position: tuple of candidate letters
    char_error: float         # Hamming distance / word length
    corrected_word: str
    corrected_error: float

    def __post_init__(self):
        if len(self.guessed_word) != len(self.actual_word):
            raise ContractError("guess must match the word length")
        for err in (self.char_error, self.corrected_error):
            if not 0.0 <= err <= 1.0:
                raise ContractError("character error must lie in [0, 1]")


def edit_distance(a, b):
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def load_dictionary(path):
    """One lowercase a-z word per line; blank lines ignored."""
    words = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            word = line.strip()
            if not word:
                continue
            if not word.isascii() or not word.isalpha() or not word.islower():
                raise ContractError(
                    f"dictionary line {lineno}: {word!r} is not a lowercase "
                    "a-z word")
            words.append(word)
    if not words:
        raise ContractError("dictionary is empty")
    return words


def correct_word(guessed, dictionary, top5_sets):
    """Dictionary entry closest to the guess by edit distance.

    Ties are broken by the number of positions whose dictionary letter
    appears in that position's top-5 candidates (more is better), then
    lexicographically.
    """
    if not dictionary:
        raise ContractError("dictionary is empty")

    def support(entry):
        return sum(1 for i, ch in enumerate(entry[:len(top5_sets)])
                   if ch in top5_sets[i])

    return min(dictionary,
               key=lambda w: (edit_distance(guessed, w), -support(w), w))


def _assemble_word_audio(letters, bank, rng, sample_rate,
                         gap_s=0.25, lead_s=0.15):
    """Silence-padded concatenation of one drawn sample per letter."""
    gap = np.zeros(int(round(gap_s * sample_rate)))
    pieces = [np.zeros(int(round(lead_s * sample_rate)))]
    for letter in letters:
        options = bank[letter]
        pick = options[int(rng.integers(len(options)))]
        pieces.append(pick.waveform.samples)
        pieces.append(gap)
    return AudioBuffer(np.concatenate(pieces), sample_rate)


def recover_words(model, letter_bank, dictionary, n_trials, seed=0,
                  feature_kind="mfcc", feature_cfg=None):
    """Run n_trials word-recovery attempts against a trained classifier.

    Each trial draws a dictionary word, synthesizes its typing sound from
    the per-letter bank, segments it with a threshold calibrated to the
    word length, and classifies every keystroke. Words using a letter
    missing from the bank are skipped with a warning. Bank samples must
    be held out from the classifier's training data.
    """
    from . import features as feat

    if n_trials < 1:
        raise ContractError("n_trials must be >= 1")
    if not letter_bank:
        raise ContractError("letter bank is empty")
    rates = {s.waveform.sample_rate
             for samples in letter_bank.values() for s in samples}
    if len(rates) != 1:
        raise ContractError("letter bank mixes sample rates")
    sample_rate = rates.pop()

    rng = np.random.default_rng(seed)
    trials = []
    for _ in range(n_trials):
        word = dictionary[int(rng.integers(len(dictionary)))]
        missing = sorted(set(word) - set(letter_bank))
        if missing:
            warnings.warn(
                f"skipping {word!r}: letters {missing} missing from bank",
                UserWarning, stacklevel=2)
            continue
        audio = _assemble_word_audio(word, letter_bank, rng, sample_rate)
        cfg = calibrate_threshold(audio, len(word),
                                  SegmenterConfig(threshold=1.0))
        segments = detect_keystrokes(audio, cfg)
        if len(segments) != len(word):
            warnings.warn(
                f"skipping {word!r}: segmenter found {len(segments)} "
                f"keystrokes for {len(word)} letters",
                UserWarning, stacklevel=2)
            continue
        guessed = []
        top5 = []
        for seg in segments:
            vec = feat.extract(seg, kind=feature_kind, cfg=feature_cfg)
            ranking = learn.predict_ranked(model, vec.values)
            top = ranking.top(min(5, len(model.classes)))
            guessed.append(top[0])
            top5.append(tuple(top))
        guessed = "".join(guessed)
        hamming = sum(a != g for a, g in zip(word, guessed))
        corrected = correct_word(guessed, dictionary, tuple(top5))
        corrected_err = (edit_distance(word, corrected)
                         / max(len(word), len(corrected)))
        trials.append(WordTrial(
            actual_word=word,
            guessed_word=guessed,
            top5_sets=tuple(top5),
            char_error=hamming / len(word),
            corrected_word=corrected,
            corrected_error=corrected_err,
        ))
    return trials


def word_error_summary(trials):
    if not trials:
        raise ContractError("no completed trials to summarize")
    raw = [t.char_error for t in trials]
    corrected = [t.corrected_error for t in trials]
    return {
        "n_trials": len(trials),
        "char_error_mean": float(np.mean(raw)),
        "char_error_std": float(np.std(raw)),
        "corrected_error_mean": float(np.mean(corrected)),
        "corrected_error_std": float(np.std(corrected)),
    }


# ------------------------------------------------------ password planning

@dataclass(frozen=True)
class CrackPlan:
    """Enumeration schedule for a password search aided by eavesdropping.

    The attacker heard every keystroke and has x ranked guesses per
    character, each containing the true character with probability p.
    Phase w enumerates every candidate that assumes exactly w positions
    fell outside the attacker's guesses; the phases partition the full
    alphabet_size**length space.
    """
    alphabet_size: int
    password_length: int
    guesses_per_char: int
    per_char_accuracy: float

    def __post_init__(self):
        if self.alphabet_size < 1 or self.password_length < 1:
            raise ContractError("alphabet and length must be >= 1")
        if not 1 <= self.guesses_per_char <= self.alphabet_size:
            raise ContractError(
                "guesses_per_char must lie in [1, alphabet_size]")
        if not 0.0 <= self.per_char_accuracy <= 1.0:
            raise ContractError("per_char_accuracy must lie in [0, 1]")

    @property
    def phases(self):
        return tuple(range(self.password_length + 1))


def phase_counts(plan):
    """Exact candidate count per phase, as arbitrary-precision integers."""
    L, n, x = (plan.alphabet_size, plan.password_length,
               plan.guesses_per_char)
    return [math.comb(n, w) * x ** (n - w) * (L - x) ** w
            for w in plan.phases]


def phase_masses(plan):
    """Probability that the true password falls in each phase."""
    n, p = plan.password_length, plan.per_char_accuracy
    return [math.comb(n, w) * p ** (n - w) * (1.0 - p) ** w
            for w in plan.phases]


def expected_guesses(plan, success_target):
    """Candidates enumerated before the success probability is reached.

    Phases are tried in order w = 0, 1, ..., n. The return value is the
    cumulative candidate count at which cumulative probability first
    reaches the target, interpolated linearly inside the final phase
    (uniform placement within a phase).
    """
    if not 0.0 < success_target < 1.0:
        raise ContractError("success_target must lie in (0, 1)")
    counts = phase_counts(plan)
    masses = phase_masses(plan)
    done = 0
    cumulative = 0.0
    for count, mass in zip(counts, masses):
        if cumulative + mass >= success_target:
            if mass <= 0.0:
                return float(done)
            fraction = (success_target - cumulative) / mass
            return done + fraction * count
        cumulative += mass
        done += count
    # float round-off can leave the total a hair under 1.0
    return float(done)


def full_space(plan):
    """Exact size of the unassisted search space."""
    return plan.alphabet_size ** plan.password_length


def check_reference_values(plan, references, tolerance=0.01):
    """Compare claimed counts against exact arithmetic.

    `references` maps names to claimed values for this plan's search
    space; supported names are "full_space" and "half_space". Each entry
    in the result records the exact value and whether the claim agrees
    within the tolerance. Claims that disagree are flagged, not adopted.
    """
    exact_values = {
        "full_space": full_space(plan),
        "half_space": full_space(plan) // 2,
    }
    findings = []
    for name, claimed in references.items():
        if name not in exact_values:
            raise ContractError(
                f"unknown reference {name!r}; expected one of "
                f"{sorted(exact_values)}")
        exact = exact_values[name]
        rel = abs(claimed - exact) / exact
        findings.append({
            "name": name,
            "claimed": float(claimed),
            "exact": int(exact),
            "relative_error": float(rel),
            "consistent": bool(rel <= tolerance),
        })
    return findings


def speedup_report(plan, baseline_plan, success_target=0.5,
                   references=None):
    """How much the eavesdropped schedule beats a baseline search.

    Reports expected guess counts for both plans at the target success
    probability, their ratio, the log2 search-size comparison, the exact
    phase-0 count, and exact-arithmetic checks of any supplied reference
    values.
    """
    assisted = expected_guesses(plan, success_target)
    baseline = expected_guesses(baseline_plan, success_target)
    if assisted <= 0:
        raise ContractError("assisted plan has an empty phase schedule")
    report = {
        "success_target": success_target,
        "assisted_guesses": assisted,
        "baseline_guesses": baseline,
        "speedup": baseline / assisted,
        "assisted_bits": math.log2(assisted) if assisted > 0 else 0.0,
        "baseline_bits": math.log2(baseline) if baseline > 0 else 0.0,
        "phase0_count": phase_counts(plan)[0],
        "phase0_mass": phase_masses(plan)[0],
        "full_space": full_space(plan),
        "interpolation": "uniform placement within each phase",
    }
    report["entropy_reduction"] = (
        1.0 - report["assisted_bits"] / report["baseline_bits"]
        if report["baseline_bits"] > 0 else 0.0)
    if references:
        report["reference_checks"] = check_reference_values(
            plan, references)
    return report
