"""Dual-rate frame timelines and reference-frame allocation.

Audio runs at one unit per 20 ms frame and video at one unit per 40 ms frame,
so the video stream takes the unit at every even audio index.
"""
import json
from dataclasses import dataclass

import numpy as np

from .errors import NotIsometric, WrongFrameRate
from .units import ContinuousUnitSeq, as_units

AUDIO_FRAME_MS = 20
VIDEO_FRAME_MS = 40
POLICIES = ("one_to_one", "wrap", "pingpong")


@dataclass(frozen=True, eq=False)
class FrameTimeline:
    audio_units: np.ndarray
    video_units: np.ndarray
    ref_indices: np.ndarray

    def to_json(self):
        return json.dumps({
            "audio_units": self.audio_units.tolist(),
            "video_units": self.video_units.tolist(),
            "ref_indices": self.ref_indices.tolist(),
        }, separators=(", ", ": "))


def build_timeline(z):
    if not isinstance(z, ContinuousUnitSeq):
        z = ContinuousUnitSeq(as_units(z))
    if z.frame_ms != AUDIO_FRAME_MS:
        raise WrongFrameRate(f"expected {AUDIO_FRAME_MS} ms frames, got {z.frame_ms} ms")
    audio = z.units.copy()
    step = VIDEO_FRAME_MS // AUDIO_FRAME_MS
    return FrameTimeline(audio, audio[::step].copy(), np.empty(0, np.int64))


def video_frame_count(n_audio):
    return -(-int(n_audio) // (VIDEO_FRAME_MS // AUDIO_FRAME_MS))


def assign_reference_frames(n_video, n_ref, policy="one_to_one"):
    """Pick a reference video frame per output frame.

    Returns ``(ref_indices, repeats)`` where ``repeats`` counts output frames
    that reuse a reference frame already shown.
    """
    if n_video < 0:
        raise ValueError("n_video must be >= 0")
    if n_ref < 1:
        raise ValueError("n_ref must be >= 1")
    i = np.arange(n_video, dtype=np.int64)
    if policy == "one_to_one":
        if n_video > n_ref:
            raise NotIsometric(f"{n_video} output frames but only {n_ref} reference frames")
        idx = i
    elif policy == "wrap":
        idx = i % n_ref
    elif policy == "pingpong":
        if n_ref == 1:
            idx = np.zeros(n_video, np.int64)
        else:
            period = 2 * (n_ref - 1)
            phase = i % period
            idx = np.where(phase < n_ref, phase, period - phase)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    repeats = int(n_video - np.unique(idx).size)
    return idx, repeats


def schedule(z, n_ref=None, policy="one_to_one"):
    """Timeline plus reference assignment; ``n_ref`` defaults to the video frame count."""
    tl = build_timeline(z)
    n_video = tl.video_units.shape[0]
    refs, repeats = assign_reference_frames(n_video, max(n_video, 1) if n_ref is None else n_ref, policy)
    return FrameTimeline(tl.audio_units, tl.video_units, refs), repeats
