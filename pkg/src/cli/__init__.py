from .model_file import ModelFile, LoadedModel, parse_model_text, build_model, load_model
from .report_writer import write_csv, read_csv, write_svg, save_report, schema_line
from .commands import build_parser, run, exit_code_for, parse_alpha_grid, parse_delays
