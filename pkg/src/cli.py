"""
Command Line Interface for Keyframer - staged animated chart transitions.
"""
import logging
import sys

from docopt import docopt

from models.animation import recommend_animations, retime
from models.config import DEFAULT_MAX_KEYFRAMES, DEFAULT_TOP_K
from models.db.service import list_animations, load_animation, save_animation
from models.documents import (
    dump_document, error_document, keyframes_document, keyframes_from_document,
    plan_from_document, read_document, timeline_from_document,
)
from models.edit_ops import diff
from models.errors import KeyframerError, ValidationError
from models.keyframes import recommend_keyframes
from models.parser import load_chart_spec
from models.timeline import STAGGER_ORDERS, compile_timeline, sample

__version__ = '1.0.0'

USAGE = '''Keyframer - staged animated transitions between charts

Usage:
  keyframer diff <start> <end> [--o=<file>] [--verbose]
  keyframer recommend-keyframes <start> <end> [--top=<k>] [--max-keyframes=<n>] [--o=<file>] [--verbose]
  keyframer recommend-anim <sequence> --stages=<m> [--rank=<r>] [--top=<k>] [--o=<file>] [--verbose]
  keyframer compile <sequence> <plan> [--rank=<r>] [--plan-rank=<r>] [--key=<field>] [--stagger-order=<order>] [--o=<file>] [--verbose]
  keyframer sample <timeline> --t=<t> [--o=<file>] [--verbose]
  keyframer pipeline <start> <end> --stages=<m> [--top=<k>] [--max-keyframes=<n>] [--key=<field>] [--stagger-order=<order>] [--t=<t>] [--o=<file>] [--verbose]
  keyframer retime <plan> --step=<i> --stage=<j> [--plan-rank=<r>] [--duration=<ms>] [--delay=<ms>] [--stagger=<s>] [--easing=<name>] [--o=<file>] [--verbose]
  keyframer save_animation <name> <sequence> <plan> [--rank=<r>] [--plan-rank=<r>] [--db=<path>] [--verbose]
  keyframer load_animation <name> [--db=<path>] [--o=<file>] [--verbose]
  keyframer list_animations [--db=<path>] [--o=<file>] [--verbose]
  keyframer (-h | --help)
  keyframer --version

Options:
  -h --help                Show this screen.
  --version                Show version.
  --o=<file>               Write the output document to the specified file.
  --top=<k>                Number of ranked results [default: 5].
  --max-keyframes=<n>      Largest number of intermediate keyframes [default: 4].
  --stages=<m>             Total number of animation stages.
  --rank=<r>               Sequence to use from a ranked sequence document [default: 1].
  --plan-rank=<r>          Plan to use from a ranked plan document [default: 1].
  --key=<field>            Data join key field.
  --stagger-order=<order>  Stagger elements in data or value order [default: data].
  --t=<t>                  Normalized sample time in [0, 1].
  --step=<i>               Zero-based keyframe pair of the step to retime.
  --stage=<j>              Zero-based stage of the step to retime.
  --duration=<ms>          New stage duration in ms.
  --delay=<ms>             New pause before the stage in ms.
  --stagger=<s>            New stagger fraction in [0, 1].
  --easing=<name>          New easing: linear or cubic-in-out.
  --db=<path>              Path to the animation library SQLite database.
  --verbose                Log progress to standard error.

Commands:
  diff                 Print the edit operations between two charts.
  recommend-keyframes  Rank keyframe sequences between two charts.
  recommend-anim       Rank staged animation plans over a keyframe sequence.
  compile              Compile a keyframe sequence and plan into a timeline.
  sample               Sample a timeline at a normalized time.
  pipeline             Recommend keyframes and animations, then compile.
  retime               Edit the timing of one stage of a plan.
  save_animation       Save a keyframe sequence and plan to the library.
  load_animation       Load an animation from the library.
  list_animations      List the animations in the library.
'''


def _int(value, option, low=None):
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{option} must be an integer, got {value!r}", path=option)
    if low is not None and number < low:
        raise ValidationError(f"{option} must be at least {low}, got {number}", path=option)
    return number


def _float(value, option):
    if value is None:
        return None
    try:
        return float(value)
    except ValueError:
        raise ValidationError(f"{option} must be a number, got {value!r}", path=option)


def _stagger_order(value):
    if value not in STAGGER_ORDERS:
        raise ValidationError(f"--stagger-order must be one of {', '.join(STAGGER_ORDERS)}, got {value!r}",
                              path="--stagger-order")
    return value


def _t(value):
    if value is None:
        raise ValidationError("--t is required", path="--t")
    return _float(value, "--t")


class KeyframerApp:
    """Main application class for the Keyframer CLI."""

    def __init__(self, stdout=None):
        self.stdout = stdout

    def emit(self, document, filename=None):
        """Print a document, or write it to ``filename``."""
        text = dump_document(document)
        if filename:
            with open(filename, 'w') as f:
                f.write(text)
        else:
            (self.stdout or sys.stdout).write(text)
        return document

    def run(self, argv=None):
        """Run the CLI application."""
        args = docopt(USAGE, argv=argv, version=f'Keyframer {__version__}')
        if args['--verbose']:
            logging.basicConfig(level=logging.DEBUG, stream=sys.stderr,
                                format='%(levelname)s %(name)s: %(message)s')
        try:
            document = self.dispatch(args)
            self.emit(document, args['--o'])
        except KeyframerError as e:
            print(dump_document(e.to_document()), end='', file=sys.stderr)
            sys.exit(e.exit_code)
        except OSError as e:
            print(dump_document(error_document(e)), end='', file=sys.stderr)
            sys.exit(1)

    def dispatch(self, args):
        if args['diff']:
            return self.diff(args['<start>'], args['<end>'])
        if args['recommend-keyframes']:
            return self.recommend_keyframes(
                args['<start>'], args['<end>'],
                _int(args['--top'], '--top', 1), _int(args['--max-keyframes'], '--max-keyframes', 0))
        if args['recommend-anim']:
            return self.recommend_anim(
                args['<sequence>'], _int(args['--stages'], '--stages', 1),
                _int(args['--top'], '--top', 1), _int(args['--rank'], '--rank', 1))
        if args['compile']:
            return self.compile(
                args['<sequence>'], args['<plan>'], _int(args['--rank'], '--rank', 1),
                _int(args['--plan-rank'], '--plan-rank', 1), args['--key'],
                _stagger_order(args['--stagger-order']))
        if args['sample']:
            return self.sample(args['<timeline>'], _t(args['--t']))
        if args['pipeline']:
            return self.pipeline(
                args['<start>'], args['<end>'], _int(args['--stages'], '--stages', 1),
                _int(args['--top'], '--top', 1), _int(args['--max-keyframes'], '--max-keyframes', 0),
                args['--key'], _stagger_order(args['--stagger-order']),
                _float(args['--t'], '--t'))
        if args['retime']:
            return self.retime(
                args['<plan>'], _int(args['--step'], '--step', 0), _int(args['--stage'], '--stage', 0),
                _int(args['--plan-rank'], '--plan-rank', 1), _float(args['--duration'], '--duration'),
                _float(args['--delay'], '--delay'), _float(args['--stagger'], '--stagger'), args['--easing'])
        if args['save_animation']:
            return self.save_animation(
                args['<name>'], args['<sequence>'], args['<plan>'], _int(args['--rank'], '--rank', 1),
                _int(args['--plan-rank'], '--plan-rank', 1), args['--db'])
        if args['load_animation']:
            return self.load_animation(args['<name>'], args['--db'])
        if args['list_animations']:
            return self.list_animations(args['--db'])
        raise ValidationError("No command given")

    def _chart(self, filename):
        return load_chart_spec(read_document(filename), prefix=filename)

    def _sequence(self, filename, rank=1):
        return keyframes_from_document(read_document(filename), rank)

    def _plan(self, filename, rank=1):
        return plan_from_document(read_document(filename), rank)

    def diff(self, start, end):
        """
        Diff two chart files.

        Returns:
            list: The edit operation documents
        """
        return diff(self._chart(start), self._chart(end)).to_document()

    def recommend_keyframes(self, start, end, top_k=DEFAULT_TOP_K, max_keyframes=DEFAULT_MAX_KEYFRAMES):
        """
        Recommend ranked keyframe sequences between two chart files.

        Args:
            start (str): Start chart file
            end (str): End chart file
            top_k (int): Number of sequences to keep
            max_keyframes (int): Largest number of intermediate keyframes

        Returns:
            list: Ranked keyframe sequence documents
        """
        sequences = recommend_keyframes(self._chart(start), self._chart(end), max_keyframes, top_k)
        return [s.to_document(rank) for rank, s in enumerate(sequences, 1)]

    def recommend_anim(self, sequence, stages, top_k=DEFAULT_TOP_K, rank=1):
        """
        Recommend staged animation plans over one keyframe sequence.

        Args:
            sequence (str): Keyframe sequence document file
            stages (int): Total stage budget
            top_k (int): Number of plans to keep
            rank (int): Which ranked sequence of the file to use

        Returns:
            list: Ranked animation plan documents
        """
        plans = recommend_animations(self._sequence(sequence, rank), stages, top_k)
        return [p.to_document(r) for r, p in enumerate(plans, 1)]

    def compile(self, sequence, plan, rank=1, plan_rank=1, key=None, stagger_order='data'):
        """
        Compile a keyframe sequence and a staged plan into a timeline.

        Args:
            sequence (str): Keyframe sequence document file
            plan (str): Animation plan document file
            rank (int): Which ranked sequence of the file to use
            plan_rank (int): Which ranked plan of the file to use
            key (str, optional): Field joining marks across keyframes
            stagger_order (str): Order of staggered marks

        Returns:
            dict: The timeline document
        """
        timeline = compile_timeline(self._sequence(sequence, rank), self._plan(plan, plan_rank).steps,
                                    key, stagger_order)
        return timeline.to_document()

    def sample(self, timeline, t):
        """
        Sample a compiled timeline file at normalized time ``t``.

        Returns:
            dict: The scene document
        """
        return sample(timeline_from_document(read_document(timeline)), t).to_document()

    def pipeline(self, start, end, stages, top_k=DEFAULT_TOP_K, max_keyframes=DEFAULT_MAX_KEYFRAMES,
                 key=None, stagger_order='data', t=None):
        """
        Recommend keyframes, recommend animations over the best sequence and
        compile the best plan.

        Returns:
            dict: keyframes, animations, timeline and, given t, sample documents
        """
        sequences = recommend_keyframes(self._chart(start), self._chart(end), max_keyframes, top_k)
        plans = recommend_animations(sequences[0], stages, top_k)
        timeline = compile_timeline(sequences[0], plans[0].steps, key, stagger_order)
        document = {
            'keyframes': [s.to_document(rank) for rank, s in enumerate(sequences, 1)],
            'animations': [p.to_document(rank) for rank, p in enumerate(plans, 1)],
            'timeline': timeline.to_document(),
        }
        if t is not None:
            document['sample'] = sample(timeline, t).to_document()
        return document

    def retime(self, plan, step, stage, plan_rank=1, duration=None, delay=None, stagger=None, easing=None):
        """
        Change the timing of one stage of one step of a plan.

        Args:
            plan (str): Animation plan document file
            step (int): Index of the keyframe pair
            stage (int): Index of the stage within the step
            plan_rank (int): Which ranked plan of the file to use
            duration, delay, stagger, easing: New timing values; None keeps the old one

        Returns:
            dict: The edited plan document

        Raises:
            ValidationError: If the step or stage does not exist
        """
        candidate = self._plan(plan, plan_rank)
        if not 0 <= step < len(candidate.steps):
            raise ValidationError(f"Step {step} does not exist; the plan has {len(candidate.steps)}",
                                  path='--step')
        steps = list(candidate.steps)
        steps[step] = retime(steps[step], stage, duration, delay, stagger, easing)
        return type(candidate).of(steps).to_document()

    def save_animation(self, name, sequence, plan, rank=1, plan_rank=1, db_path=None):
        """
        Save a keyframe sequence and its plan to the animation library.

        Returns:
            dict: The saved name with keyframe and stage counts
        """
        keyframes = self._sequence(sequence, rank)
        candidate = self._plan(plan, plan_rank)
        save_animation(name, keyframes, candidate, db_path)
        return {'saved': name, 'keyframes': len(keyframes), 'stages': candidate.total_stages}

    def load_animation(self, name, db_path=None):
        """Load a saved animation as a keyframe sequence document with its plan."""
        keyframes, plan = load_animation(name, db_path)
        document = keyframes_document(keyframes)
        document['name'] = name
        document['plan'] = plan.to_document()
        return document

    def list_animations(self, db_path=None):
        """List the saved animations."""
        return list_animations(db_path)


def main():
    """Entry point for the Keyframer application."""
    KeyframerApp().run()


if __name__ == '__main__':
    main()
