import logging

from schottkyzeta.tools.logger import Logger

local_logger = Logger(file_path="./test_log")

local_logger.set_file_level(level="DEBUG")
local_logger.set_stream_level(level="INFO")


class RefinementCounter:
    def __init__(self):
        self.seeds = 0
        self.converged = 0

    def __repr__(self) -> str:
        return "refinement"


counter = RefinementCounter()
progress = {"lines_done": 0}

local_logger.add_attributes(container=counter, attributes=["seeds", "converged"])
local_logger.add_attributes(container=progress, attributes=["lines_done"])

for line in range(3):
    counter.seeds += 2
    counter.converged += 1
    progress["lines_done"] = line + 1
    local_logger.update()

local_logger.debug("message")

# records of the library modules reach the same handlers
logging.getLogger("schottkyzeta.spectral.zeros").info("[ZEROS] forwarded")

local_logger.close()
