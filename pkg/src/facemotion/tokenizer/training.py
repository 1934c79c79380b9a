"""VQ codec training: straight-through estimator with commitment loss.

The codebook is k-means initialized from the untrained encoder's latents and
entries unused for a full epoch are re-seeded to random training latents.
Training is single-threaded and bit-deterministic under a fixed seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import torch

from ..errors import RejectedInputError, TrainingDivergedError
from .codec import (
    Codebook,
    Codec,
    Mlp,
    MotionClip,
    NormalizationStats,
    TokenizerPair,
    _frame_windows,
)

logger = logging.getLogger(__name__)


@dataclass
class CodecConfig:
    n_codes: int = 512
    code_dim: int = 16
    hidden_dim: int = 64
    stride: int = 1
    epochs: int = 30
    batch_size: int = 256
    learning_rate: float = 1e-3
    commitment_weight: float = 0.25
    kmeans_iters: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_codes < 2:
            raise RejectedInputError("n_codes must be >= 2")
        if self.stride < 1 or self.epochs < 1:
            raise RejectedInputError("stride and epochs must be >= 1")


class _VqNet(torch.nn.Module):
    def __init__(self, in_dim: int, cfg: CodecConfig):
        super().__init__()
        self.encoder = torch.nn.Sequential(
            torch.nn.Linear(in_dim, cfg.hidden_dim),
            torch.nn.ReLU(),
            torch.nn.Linear(cfg.hidden_dim, cfg.code_dim),
        )
        self.decoder = torch.nn.Sequential(
            torch.nn.Linear(cfg.code_dim, cfg.hidden_dim),
            torch.nn.ReLU(),
            torch.nn.Linear(cfg.hidden_dim, in_dim),
        )
        self.codebook = torch.nn.Parameter(torch.zeros(cfg.n_codes, cfg.code_dim))

    def quantize(self, z: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        d = (z[:, None, :] - self.codebook[None, :, :]).pow(2).sum(-1)
        idx = d.argmin(dim=1)
        return self.codebook[idx], idx

    def forward(self, x: torch.Tensor):
        z = self.encoder(x)
        quantized, idx = self.quantize(z)
        z_q = z + (quantized - z).detach()  # straight-through
        recon = self.decoder(z_q)
        recon_loss = torch.mean((recon - x) ** 2)
        codebook_loss = torch.mean((quantized - z.detach()) ** 2)
        commit_loss = torch.mean((z - quantized.detach()) ** 2)
        return recon_loss, codebook_loss, commit_loss, idx


def _kmeans(points: np.ndarray, k: int, iters: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    if n >= k:
        centers = points[rng.choice(n, size=k, replace=False)].copy()
    else:
        centers = points[rng.choice(n, size=k, replace=True)].copy()
        centers += rng.normal(scale=1e-3, size=centers.shape)
    for _ in range(iters):
        d = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        assign = np.argmin(d, axis=1)
        for j in range(k):
            members = points[assign == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                centers[j] = points[rng.integers(n)]
    return centers


def _stream_windows(clips: list[MotionClip], stream: str,
                    stride: int) -> tuple[NormalizationStats, np.ndarray]:
    mats = [getattr(c, stream) for c in clips]
    stats = NormalizationStats.from_data(np.concatenate(mats, axis=0))
    windows = [_frame_windows(stats.normalize(m), stride) for m in mats]
    return stats, np.concatenate(windows, axis=0)


def _export_mlp(seq: torch.nn.Sequential) -> Mlp:
    weights, biases = [], []
    for layer in seq:
        if isinstance(layer, torch.nn.Linear):
            weights.append(layer.weight.detach().numpy().T.astype(np.float64).copy())
            biases.append(layer.bias.detach().numpy().astype(np.float64).copy())
    return Mlp(weights=weights, biases=biases)


def train_stream_codec(clips: list[MotionClip], stream: str, cfg: CodecConfig) -> tuple[Codec, dict]:
    """Train one VQ codec ('expression' or 'pose'); returns the frozen codec and a loss report."""
    if not clips:
        raise RejectedInputError("training requires at least one clip")
    stats, windows = _stream_windows(clips, stream, cfg.stride)
    n_win, in_dim = windows.shape

    torch.manual_seed(cfg.seed)
    net = _VqNet(in_dim, cfg)
    rng = np.random.default_rng(cfg.seed)

    x_all = torch.from_numpy(windows.astype(np.float32))
    with torch.no_grad():
        sample = rng.choice(n_win, size=min(n_win, 8192), replace=False)
        init_latents = net.encoder(x_all[np.sort(sample)]).numpy().astype(np.float64)
    centers = _kmeans(init_latents, cfg.n_codes, cfg.kmeans_iters, rng)
    with torch.no_grad():
        net.codebook.copy_(torch.from_numpy(centers.astype(np.float32)))

    opt = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)
    losses = {"recon": float("nan"), "codebook": float("nan"), "commitment": float("nan")}
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_win)
        used = np.zeros(cfg.n_codes, dtype=bool)
        epoch_latents: torch.Tensor | None = None
        sums = np.zeros(3)
        n_batches = 0
        for start in range(0, n_win, cfg.batch_size):
            batch = x_all[order[start:start + cfg.batch_size]]
            recon_loss, codebook_loss, commit_loss, idx = net(batch)
            loss = recon_loss + codebook_loss + cfg.commitment_weight * commit_loss
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss while training {stream} codec",
                    epoch=epoch, step=n_batches,
                    diagnostics={"recon": recon_loss.item(), "codebook": codebook_loss.item(),
                                 "commitment": commit_loss.item()})
            opt.zero_grad()
            loss.backward()
            opt.step()
            used[idx.numpy()] = True
            with torch.no_grad():
                epoch_latents = net.encoder(batch).detach()
            sums += [recon_loss.item(), codebook_loss.item(), commit_loss.item()]
            n_batches += 1
        dead = np.flatnonzero(~used)
        if len(dead) and epoch < cfg.epochs - 1:
            _reseed_dead(net, opt, dead, epoch_latents, rng)
            logger.debug("%s codec epoch %d: reseeded %d dead entries", stream, epoch, len(dead))
        losses = dict(zip(("recon", "codebook", "commitment"), (sums / n_batches).tolist()))

    codebook = Codebook(
        entries=net.codebook.detach().numpy().astype(np.float64).copy(),
        encoder=_export_mlp(net.encoder),
        decoder=_export_mlp(net.decoder),
    )
    report = {"final_recon_loss": losses["recon"], "final_losses": losses,
              "n_windows": int(n_win), "epochs": cfg.epochs}
    logger.info("%s codec trained: final normalized recon MSE %.6g", stream, losses["recon"])
    return Codec(codebook=codebook, stats=stats), report


def _reseed_dead(net: _VqNet, opt: torch.optim.Adam, dead: np.ndarray,
                 latents: torch.Tensor, rng: np.random.Generator) -> None:
    pick = rng.integers(len(latents), size=len(dead))
    with torch.no_grad():
        net.codebook[dead] = latents[pick]
        state = opt.state.get(net.codebook)
        if state:  # clear stale moments for replaced rows
            state["exp_avg"][dead] = 0.0
            state["exp_avg_sq"][dead] = 0.0


def train_codec(clips: list[MotionClip], cfg: CodecConfig) -> TokenizerPair:
    """Train the expression and pose codecs independently with shared hyperparameters."""
    expr_codec, expr_report = train_stream_codec(clips, "expression", cfg)
    pose_codec, pose_report = train_stream_codec(clips, "pose", replace(cfg, seed=cfg.seed + 1))
    return TokenizerPair(
        expression_codec=expr_codec,
        pose_codec=pose_codec,
        temporal_stride=cfg.stride,
        training_report={"expression": expr_report, "pose": pose_report},
    )
