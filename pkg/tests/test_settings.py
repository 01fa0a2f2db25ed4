import json

from src.core.settings import DEFAULT_SETTINGS, JOBS_ENV_VAR, SETTINGS_FILE, load_settings


def test_shipped_settings_match_defaults(monkeypatch):
    monkeypatch.delenv(JOBS_ENV_VAR, raising=False)
    assert SETTINGS_FILE.exists()
    assert load_settings() == DEFAULT_SETTINGS


def test_partial_file_is_merged(tmp_path, monkeypatch):
    monkeypatch.delenv(JOBS_ENV_VAR, raising=False)
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"mapper": {"kmax": 19}}), encoding="utf-8")
    settings = load_settings(path)
    assert settings["mapper"]["kmax"] == 19
    assert settings["mapper"]["resolution"] == DEFAULT_SETTINGS["mapper"]["resolution"]
    assert settings["edgeworth"] == DEFAULT_SETTINGS["edgeworth"]


def test_missing_file_uses_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv(JOBS_ENV_VAR, raising=False)
    assert load_settings(tmp_path / "absent.json") == DEFAULT_SETTINGS


def test_jobs_env_override(monkeypatch):
    monkeypatch.setenv(JOBS_ENV_VAR, "3")
    assert load_settings()["compute"]["jobs"] == 3
    monkeypatch.setenv(JOBS_ENV_VAR, "many")
    assert load_settings()["compute"]["jobs"] == DEFAULT_SETTINGS["compute"]["jobs"]


def test_defaults_not_mutated(tmp_path, monkeypatch):
    monkeypatch.setenv(JOBS_ENV_VAR, "5")
    load_settings(tmp_path / "absent.json")
    assert DEFAULT_SETTINGS["compute"]["jobs"] == 1
