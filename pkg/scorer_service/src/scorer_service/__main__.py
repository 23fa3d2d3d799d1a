"""Run the service under uvicorn: python -m scorer_service [--config path]."""

import argparse
import logging

from .app import create_app
from .config import load_config


def main() -> None:
    parser = argparse.ArgumentParser(description="masked-LM cloze scoring service")
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--host", help="listen address override")
    parser.add_argument("--port", type=int, help="listen port override")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    config = load_config(args.config)
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port

    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
