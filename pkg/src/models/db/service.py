"""
Database service for saving and loading authored animations.
"""
import json
import logging
import os

from sqlalchemy.exc import SQLAlchemyError

from ..config import db_path as default_db_path
from ..documents import keyframes_document, keyframes_from_document, plan_from_document
from ..errors import AnimationNotFound, KeyframerError, ValidationError
from .animation_models import AnimationDB
from .base import Database

logger = logging.getLogger(__name__)

MEMORY = ':memory:'


class StoreError(KeyframerError):
    """The animation library database cannot be used."""


def database_url(path):
    if path == MEMORY:
        return 'sqlite:///:memory:'
    return 'sqlite:///' + os.path.abspath(path).replace('\\', '/')


class DatabaseService:
    """The animation library: named keyframe sequences with their staged plans."""

    def __init__(self, db_path=None):
        """Open (and create if needed) the library database.

        Args:
            db_path (str, optional): SQLite file; ``KEYFRAMER_DB_PATH`` or the
                default path when omitted, ``:memory:`` for a private store
        """
        self.db_path = db_path or default_db_path()
        if self.db_path != MEMORY:
            directory = os.path.dirname(os.path.abspath(self.db_path))
            try:
                os.makedirs(directory, exist_ok=True)
            except OSError as e:
                raise StoreError(f"Cannot create directory '{directory}': {e.strerror}", path="db")
        try:
            self.db = Database(database_url(self.db_path))
            self.db.create_tables()
        except SQLAlchemyError as e:
            raise StoreError(f"Cannot open animation library '{self.db_path}': {e}", path="db")

    def close(self):
        self.db.dispose()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def save_animation(self, name, keyframes, plan):
        """
        Save an animation under ``name``, replacing any entry of that name.

        Args:
            name (str): Unique animation name
            keyframes (list): Keyframe ChartSpecs
            plan (AnimationPlanCandidate): One step per keyframe pair
        """
        if not name or not name.strip():
            raise ValidationError("An animation needs a non-empty name", path="name")
        keyframes = list(getattr(keyframes, "keyframes", keyframes))
        if len(plan.steps) != len(keyframes) - 1:
            raise ValidationError(f"{len(keyframes)} keyframes need {len(keyframes) - 1} steps, "
                                  f"the plan has {len(plan.steps)}", path="plan")
        session = self.db.get_session()
        try:
            session.merge(AnimationDB(
                name=name,
                keyframes=json.dumps(keyframes_document(keyframes), sort_keys=True),
                plan=json.dumps(plan.to_document(), sort_keys=True),
                keyframe_count=len(keyframes),
                stage_count=plan.total_stages,
            ))
            session.commit()
        except SQLAlchemyError as e:
            session.rollback()
            raise StoreError(f"Cannot save animation '{name}': {e}", path="db")
        finally:
            session.close()
        logger.info("Saved animation '%s' to %s", name, self.db_path)

    def load_animation(self, name):
        """
        Load the animation saved under ``name``.

        Returns:
            tuple: (keyframe ChartSpecs, AnimationPlanCandidate)

        Raises:
            AnimationNotFound: If no animation has that name
        """
        session = self.db.get_session()
        try:
            row = session.get(AnimationDB, name)
            if row is None:
                raise AnimationNotFound(f"No animation named '{name}' in {self.db_path}", path="name")
            keyframes, plan = row.keyframes, row.plan
        except SQLAlchemyError as e:
            raise StoreError(f"Cannot load animation '{name}': {e}", path="db")
        finally:
            session.close()
        return keyframes_from_document(json.loads(keyframes)), plan_from_document(json.loads(plan))

    def list_animations(self):
        """
        List the saved animations by name.

        Returns:
            list: dicts with name, keyframes and stages counts
        """
        session = self.db.get_session()
        try:
            rows = session.query(AnimationDB).order_by(AnimationDB.name).all()
            return [{"name": r.name, "keyframes": r.keyframe_count, "stages": r.stage_count} for r in rows]
        except SQLAlchemyError as e:
            raise StoreError(f"Cannot list animations: {e}", path="db")
        finally:
            session.close()


def save_animation(name, keyframes, plan, db_path=None):
    with DatabaseService(db_path) as service:
        service.save_animation(name, keyframes, plan)


def load_animation(name, db_path=None):
    with DatabaseService(db_path) as service:
        return service.load_animation(name)


def list_animations(db_path=None):
    with DatabaseService(db_path) as service:
        return service.list_animations()
