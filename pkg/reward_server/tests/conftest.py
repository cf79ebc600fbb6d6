import threading

import pytest

from rewardserver import create_server


@pytest.fixture
def serve():
    """Factory starting servers on free ports; all stopped at teardown."""
    running = []

    def start(model_spec, **kwargs):
        server = create_server(model_spec, host="127.0.0.1", port=0,
                               quiet=True, **kwargs)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        running.append((server, thread))
        return f"http://127.0.0.1:{server.server_address[1]}"

    yield start
    for server, thread in running:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def pytest_terminal_summary(terminalreporter):
    # mirror of the primary suite's verdict block, for this package's
    # wire-protocol criterion
    import sys

    module = sys.modules.get("test_wire_parity") or sys.modules.get(
        "tests.test_wire_parity")
    lines = getattr(module, "VERDICTS", [])
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria (wire protocol):")
        for line in lines:
            terminalreporter.write_line("  " + line)
