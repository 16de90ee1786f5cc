import subprocess
import sys


def test_fallback_selected_when_extension_unavailable():
    code = (
        "import sys\n"
        "sys.modules['maqa._lcs_c'] = None\n"  # block the compiled kernel
        "import maqa.lcs as lcs\n"
        "assert lcs.LCS_BACKEND == 'python', lcs.LCS_BACKEND\n"
        "assert lcs.lcs_len(list('banana'), list('ananas')) == 5\n"
        "print('ok')\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, timeout=60
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"


def test_selected_backend_is_exposed():
    from maqa.lcs import LCS_BACKEND

    assert LCS_BACKEND in ("c", "python")
