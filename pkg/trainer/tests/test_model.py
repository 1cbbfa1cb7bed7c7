"""Architecture invariants: parameter counts, muP/SP equality, rotary."""

import math

import numpy as np
import pytest
import torch

from walktrainer.model import (ModelConfig, WalkGPT, _apply_rotary,
                               _rotary_tables, param_count)


class TestParamCount:
    @pytest.mark.parametrize("vocab,layers,embd", [
        (8192, 2, 256),  # reference configuration for the analytic oracle
        (1000, 2, 64),
        (50257, 4, 128),
    ])
    def test_closed_form_matches_actual(self, vocab, layers, embd):
        cfg = ModelConfig(vocab_size=vocab, n_layers=layers, n_embd=embd)
        model = WalkGPT(cfg)
        total, nonembed = param_count(cfg)
        actual = sum(p.numel() for p in model.parameters())
        embedding = model.wte.weight.numel()
        assert actual == total
        assert actual - embedding == nonembed

    def test_tied_head_adds_no_params(self):
        cfg = ModelConfig(vocab_size=500, n_embd=64)
        model = WalkGPT(cfg)
        names = [n for n, _ in model.named_parameters()]
        assert sum(n.startswith("wte") for n in names) == 1


class TestHeads:
    def test_head_rule(self):
        for embd, heads in [(32, 4), (64, 4), (128, 4), (256, 4), (512, 8)]:
            assert ModelConfig(vocab_size=10, n_embd=embd).n_heads == heads

    def test_invalid_layers(self):
        with pytest.raises(ValueError):
            ModelConfig(vocab_size=10, n_layers=3).validate()


class TestParameterization:
    def test_mup_and_sp_have_identical_shapes(self):
        torch.manual_seed(0)
        sp = WalkGPT(ModelConfig(vocab_size=300, n_embd=128, mup=False))
        torch.manual_seed(0)
        mup = WalkGPT(ModelConfig(vocab_size=300, n_embd=128, mup=True))
        sp_shapes = {n: tuple(p.shape) for n, p in sp.named_parameters()}
        mup_shapes = {n: tuple(p.shape) for n, p in mup.named_parameters()}
        assert sp_shapes == mup_shapes

    def test_mup_shrinks_hidden_init(self):
        torch.manual_seed(0)
        sp = WalkGPT(ModelConfig(vocab_size=300, n_embd=256, mup=False))
        torch.manual_seed(0)
        mup = WalkGPT(ModelConfig(vocab_size=300, n_embd=256, mup=True))
        assert mup.blocks[0].fc.weight.std() < sp.blocks[0].fc.weight.std()
        # embeddings are not width-scaled
        assert torch.equal(mup.wte.weight, sp.wte.weight)

    def test_mup_lr_groups(self):
        model = WalkGPT(ModelConfig(vocab_size=300, n_embd=128, mup=True))
        groups = model.param_groups(lr=0.01, weight_decay=0.01)
        assert groups[0]["lr"] == pytest.approx(0.01 / 2.0)  # width_mult = 2
        assert groups[1]["lr"] == 0.01
        n_grouped = sum(p.numel() for g in groups for p in g["params"])
        assert n_grouped == sum(p.numel() for p in model.parameters())


class TestRotary:
    def test_rotation_preserves_norm(self):
        cos, sin = _rotary_tables(10, 8, 10000.0, "cpu", torch.float32)
        x = torch.randn(2, 3, 10, 8)
        y = _apply_rotary(x, cos, sin)
        assert torch.allclose(x.norm(dim=-1), y.norm(dim=-1), atol=1e-5)

    def test_position_zero_is_identity(self):
        cos, sin = _rotary_tables(5, 8, 10000.0, "cpu", torch.float32)
        x = torch.randn(1, 1, 5, 8)
        y = _apply_rotary(x, cos, sin)
        assert torch.allclose(y[..., 0, :], x[..., 0, :], atol=1e-6)

    def test_relative_position_property(self):
        # q.k depends on positions only through their difference
        cfg = ModelConfig(vocab_size=10, n_embd=32)
        cos, sin = _rotary_tables(6, cfg.head_dim, cfg.rotary_base, "cpu",
                                  torch.float32)
        q = torch.randn(1, 1, 1, cfg.head_dim).repeat(1, 1, 6, 1)
        k = torch.randn(1, 1, 1, cfg.head_dim).repeat(1, 1, 6, 1)
        rq, rk = _apply_rotary(q, cos, sin), _apply_rotary(k, cos, sin)
        dots = torch.einsum("bhtd,bhtd->bht", rq[:, :, 1:], rk[:, :, :-1])
        assert torch.allclose(dots, dots[..., :1].expand_as(dots), atol=1e-4)


class TestForward:
    def test_loss_at_init_near_uniform(self):
        torch.manual_seed(0)
        vocab = 200
        model = WalkGPT(ModelConfig(vocab_size=vocab, n_embd=64, mup=True))
        idx = torch.randint(vocab, (4, 20))
        with torch.no_grad():
            loss = float(model.loss(idx))
        assert loss == pytest.approx(math.log(vocab), abs=0.2)

    def test_deterministic_per_seed(self):
        torch.manual_seed(7)
        a = WalkGPT(ModelConfig(vocab_size=50, n_embd=32))
        torch.manual_seed(7)
        b = WalkGPT(ModelConfig(vocab_size=50, n_embd=32))
        idx = torch.randint(50, (2, 10))
        assert torch.equal(a.forward(idx), b.forward(idx))
