"""Run the workbench server.

Configuration comes from LOGICDESK_* environment variables (see
logicdesk.server.config_from_env): data root, budgets, engine limit,
sandbox on/off, static dir for the web client build.

    LOGICDESK_DATA_ROOT=./data LOGICDESK_STATIC_DIR=frontend/dist \\
        python demos/run_server.py
"""

import os

import uvicorn

from logicdesk.server import create_app

port = int(os.environ.get("LOGICDESK_PORT", 8080))
uvicorn.run(create_app(), host=os.environ.get("LOGICDESK_HOST", "127.0.0.1"), port=port)
