import json

import pytest
import yaml

from toyconfig import build_inputs, toy_settings, write_config
from wheatseg.errors import ConfigError, DataError
from wheatseg.pipeline import stages
from wheatseg.pipeline.config import STAGES, PipelineConfig, stage_seed
from wheatseg.pipeline.runrecord import (
    file_digest,
    load_record,
    stage_complete,
    write_record,
)


def load_cfg(tmp_path, settings) -> PipelineConfig:
    path = write_config(tmp_path / "pipeline.yaml", settings)
    return PipelineConfig.load(path, workdir=tmp_path / "work")


class TestStageSeed:
    def test_deterministic(self):
        assert stage_seed(42, "synth") == stage_seed(42, "synth")

    def test_stages_get_distinct_streams(self):
        seeds = {stage_seed(0, s) for s in STAGES}
        assert len(seeds) == len(STAGES)

    def test_global_seed_shifts_every_stage(self):
        for s in STAGES:
            assert stage_seed(0, s) != stage_seed(1, s)

    def test_fits_in_63_bits(self):
        for s in STAGES:
            assert 0 <= stage_seed(123456789, s) < 2**63

    def test_unknown_stage_rejected(self, tmp_path):
        cfg = PipelineConfig(raw={"workdir": str(tmp_path)})
        with pytest.raises(ConfigError):
            cfg.stage_seed("deploy")


class TestConfigLoad:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            PipelineConfig.load(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("a: [unclosed\n")
        with pytest.raises(ConfigError):
            PipelineConfig.load(path)

    def test_non_mapping_top_level(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- just\n- items\n")
        with pytest.raises(ConfigError):
            PipelineConfig.load(path)

    def test_workdir_required(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("seed: 1\n")
        with pytest.raises(ConfigError):
            PipelineConfig.load(path)

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump({"workdir": "a", "seed": 1}))
        cfg = PipelineConfig.load(path, seed=7, workdir=tmp_path / "b")
        assert cfg.seed == 7
        assert cfg.workdir == tmp_path / "b"

    def test_seed_must_be_int(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump({"workdir": "w", "seed": "many"}))
        with pytest.raises(ConfigError):
            PipelineConfig.load(path)

    def test_seed_defaults_to_zero(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump({"workdir": "w"}))
        assert PipelineConfig.load(path).seed == 0


class TestConfigAccess:
    def cfg(self, tmp_path, extra=None) -> PipelineConfig:
        raw = {"workdir": str(tmp_path), "inputs": {"frames": "frames"}}
        raw.update(extra or {})
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump(raw))
        return PipelineConfig.load(path)

    def test_dotted_get_and_require(self, tmp_path):
        cfg = self.cfg(tmp_path)
        assert cfg.get("inputs.frames") == "frames"
        assert cfg.get("inputs.absent", 5) == 5
        with pytest.raises(ConfigError):
            cfg.require("inputs.absent")

    def test_section_must_be_mapping(self, tmp_path):
        cfg = self.cfg(tmp_path, {"synthesis": "lots"})
        with pytest.raises(ConfigError):
            cfg.section("synthesis")
        assert cfg.section("unset") == {}

    def test_input_path_resolves_relative_to_config_file(self, tmp_path):
        (tmp_path / "frames").mkdir()
        cfg = self.cfg(tmp_path)
        assert cfg.input_path("inputs.frames") == tmp_path / "frames"

    def test_input_path_must_exist(self, tmp_path):
        cfg = self.cfg(tmp_path)
        with pytest.raises(ConfigError):
            cfg.input_path("inputs.frames")

    def test_optional_path_absent_is_none(self, tmp_path):
        cfg = self.cfg(tmp_path)
        assert cfg.optional_path("inputs.video") is None


class TestConfigHash:
    def test_insensitive_to_key_order(self, tmp_path):
        a = tmp_path / "a.yaml"
        b = tmp_path / "b.yaml"
        a.write_text("workdir: w\nseed: 3\n")
        b.write_text("seed: 3\nworkdir: w\n")
        assert PipelineConfig.load(a).config_hash() == PipelineConfig.load(b).config_hash()

    def test_sensitive_to_values(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("workdir: w\nseed: 3\n")
        base = PipelineConfig.load(path).config_hash()
        assert PipelineConfig.load(path, seed=4).config_hash() != base


class TestRunRecord:
    def test_round_trip(self, tmp_path):
        data = tmp_path / "input.bin"
        data.write_bytes(b"abc123")
        write_record(
            tmp_path / "stage",
            "synth",
            "cafe01",
            seed=11,
            inputs={"frame": data},
            outputs=["out/manifest.jsonl"],
        )
        record = load_record(tmp_path / "stage")
        assert record["stage"] == "synth"
        assert record["seed"] == 11
        assert record["inputs"]["frame"]["sha256"] == file_digest(data)
        assert record["outputs"] == ["out/manifest.jsonl"]
        assert record["completed_utc"] > 0

    def test_stage_complete_matches_hash(self, tmp_path):
        write_record(tmp_path, "eval", "cafe01", seed=0)
        assert stage_complete(tmp_path, "cafe01")
        assert not stage_complete(tmp_path, "beef02")
        assert not stage_complete(tmp_path / "never-ran", "cafe01")

    def test_no_tmp_file_left_behind(self, tmp_path):
        write_record(tmp_path, "eval", "cafe01", seed=0)
        assert list(tmp_path.glob("*.tmp")) == []


class TestStagePrerequisites:
    def test_translate_needs_gan_checkpoint(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        cfg = load_cfg(tmp_path, toy_settings(inputs))
        with pytest.raises(DataError, match="run the 'train-gan' stage first"):
            stages.cmd_translate(cfg)

    def test_eval_needs_trained_model(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        cfg = load_cfg(tmp_path, toy_settings(inputs))
        with pytest.raises(DataError, match="run the 'train-seg' stage first"):
            stages.cmd_eval(cfg)

    def test_finetune_needs_accepted_candidates(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        cfg = load_cfg(tmp_path, toy_settings(inputs))
        with pytest.raises(DataError, match="run the 'curate' stage first"):
            stages._curated_manifest(cfg)

    def test_synth_requires_count(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        settings = toy_settings(inputs)
        del settings["synthesis"]["count"]
        cfg = load_cfg(tmp_path, settings)
        with pytest.raises(ConfigError, match="synthesis.count"):
            stages.cmd_synth(cfg)

    def test_unknown_section_keys_rejected(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        settings = toy_settings(inputs, synthesis={"count": 4, "head_count": 3})
        cfg = load_cfg(tmp_path, settings)
        with pytest.raises(ConfigError, match="head_count"):
            stages.cmd_synth(cfg)

    def test_eval_use_validated(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        settings = toy_settings(inputs)
        settings["eval"]["use"] = "ensemble"
        cfg = load_cfg(tmp_path, settings)
        with pytest.raises(ConfigError, match="auto|seg|finetune"):
            stages.cmd_eval(cfg)


class TestSynthStage:
    def test_outputs_and_idempotent_rerun(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        cfg = load_cfg(tmp_path, toy_settings(inputs))
        manifest_path = stages.cmd_synth(cfg)
        assert manifest_path.exists()
        record = load_record(manifest_path.parent)
        assert record["config_hash"] == cfg.config_hash()
        assert record["seed"] == cfg.stage_seed("synth")
        before = manifest_path.read_bytes()
        mtime = manifest_path.stat().st_mtime_ns
        assert stages.cmd_synth(cfg) == manifest_path
        assert manifest_path.stat().st_mtime_ns == mtime
        assert manifest_path.read_bytes() == before

    def test_changed_config_invalidates_record(self, tmp_path, rng):
        inputs = build_inputs(tmp_path / "inputs", rng)
        cfg = load_cfg(tmp_path, toy_settings(inputs))
        stages.cmd_synth(cfg)
        bumped = load_cfg(tmp_path, toy_settings(inputs, synthesis={"count": 5}))
        assert not stage_complete(cfg.workdir / "synth", bumped.config_hash())
