# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Logging handlers
----------------

Records are written by the process running the command line. When the
episodes are played on a Dask cluster, workers forward their records to a
TCP log server started by that process.
"""
from typing import Awaitable, IO, Optional, Tuple, Union
import asyncio
import logging
import logging.handlers
import pickle
import socket
import struct
import sys
import threading
import tornado.ioloop
import tornado.iostream
import tornado.log
import tornado.netutil
import tornado.tcpserver

#: Synchronize logs for workers
LOCK = threading.RLock()

#: Loggers configured by this module
LOGGERS = ("distributed", __name__.split(".", 1)[0])


class LogRecordSocketReceiver(tornado.tcpserver.TCPServer):
    """Receive the records pickled by the
    :class:`logging.handlers.SocketHandler` of the workers."""
    async def handle_stream(self, stream: tornado.iostream.IOStream,
                            address: Tuple) -> Optional[Awaitable[None]]:
        """Handle the records sent over an incoming connection.

        Args:
            stream (tornado.iostream.IOStream): Incoming stream.
            address (tuple): IP address and TCP port.
        """
        while True:
            try:
                chunk = await stream.read_bytes(4)
                size = struct.unpack(">L", chunk)[0]
                chunk = await stream.read_bytes(size)
            except tornado.iostream.StreamClosedError:
                break
            record = logging.makeLogRecord(pickle.loads(chunk))
            setattr(record, "ip", address[0])
            # Every record is handled: filtering happens on the workers.
            logging.getLogger(record.name).handle(record)


class LogServer:
    """Log server running its own event loop in a daemon thread.

    Args:
        hostname (str, optional): Name of the interface to listen to,
            defaults to the name of this host.
        port (int, optional): Port to listen to, 0 to pick a free one.
    """
    def __init__(self, hostname: Optional[str] = None, port: int = 0) -> None:
        self.ip = socket.gethostbyname(hostname or socket.gethostname())
        self._sockets = tornado.netutil.bind_sockets(port, self.ip,
                                                     family=socket.AF_INET)
        self.port = self._sockets[0].getsockname()[1]
        self.thread = threading.Thread(target=self._serve, daemon=True)

    def _serve(self) -> None:
        asyncio.set_event_loop(asyncio.new_event_loop())
        server = LogRecordSocketReceiver()
        server.add_sockets(self._sockets)
        tornado.ioloop.IOLoop.current().start()

    def start(self) -> None:
        """Start the server"""
        self.thread.start()

    def __iter__(self):
        yield self.ip
        yield self.port


class LogFormatter(tornado.log.LogFormatter):
    """Inserts the IP address of the process which emitted the record."""
    def __init__(self, *args, **kwargs):
        self._ip = socket.gethostbyname(socket.gethostname())
        super().__init__(*args, **kwargs)

    def format(self, record: logging.LogRecord) -> str:
        """Do formatting for a record.

        Args:
            record (logging.Record): information to the event being logged.

        Returns:
            str: The record formatted.
        """
        if "ip" not in record.__dict__:
            record.__dict__["ip"] = self._ip
        return super().format(record)


def _config_logger(stream: Union[IO[str], logging.Handler], level: int,
                   name: str) -> logging.Logger:
    logger = logging.getLogger(name)
    formatter = LogFormatter(
        "%(color)s[%(levelname)1.1s - %(ip)s - %(asctime)s - %(module)s]"
        "%(end_color)s %(message)s",
        datefmt="%b %d %H:%M:%S")
    handler = stream if isinstance(
        stream, logging.Handler) else logging.StreamHandler(stream)
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(level)
    return logger


def setup(stream: Optional[IO[str]], debug: bool) -> logging.Logger:
    """Setup the logging system

    Args:
        stream (io, optional): Flux used to write in the log, defaults to
            the standard error so that the standard output keeps the
            products.
        debug (bool): True if the log should record debugging traces.

    Returns:
        logging.Logger: The logger of the package.
    """
    level = logging.DEBUG if debug else logging.INFO
    stream = stream or sys.stderr
    # Capture dask.distributed
    _config_logger(stream, level, LOGGERS[0])
    return _config_logger(stream, level, LOGGERS[1])


def start_server(debug: bool) -> Tuple[str, int, int]:
    """Start the server receiving the records of the workers.

    Args:
        debug (bool): True if the workers should send debugging traces.

    Returns:
        tuple: The log server settings handed to the workers.
    """
    server = LogServer()
    server.start()
    return server.ip, server.port, logging.DEBUG if debug else logging.INFO


def setup_worker_logging(logging_server: Tuple[str, int, int]) -> None:
    """Setup the logging server to log worker calculations

    Args:
        logging_server (tuple): Log server connection settings.
    """
    with LOCK:
        for name in LOGGERS:
            logger = logging.getLogger(name)
            # If this logger is already initialized we do nothing
            if logger.handlers:
                continue
            handler = logging.handlers.SocketHandler(logging_server[0],
                                                     logging_server[1])
            _config_logger(handler, logging_server[2], name)
