from typing import Dict, List, Optional
import logging

from diar.models.database import AliasRow, CentroidRow, CheckpointRow, StateRun, init_db
from diar.services.diarizer import OnlineDiarizer

logger = logging.getLogger(__name__)


class StateDumpService:
    """Сервис сохранения диагностических снимков состояния диаризатора"""

    def __init__(self, database_url: str):
        self.SessionLocal = init_db(database_url)

    def save_state(self, diarizer: OnlineDiarizer, uri: str = "session") -> int:
        """Сохраняет буферы, таблицу центроидов и карту псевдонимов

        Returns:
            id созданного снимка
        """
        db = self.SessionLocal()
        try:
            run = StateRun(
                uri=uri,
                phase=diarizer.phase.value,
                current_k=diarizer.current_k,
                n_seen=diarizer.n_seen,
                n_init=diarizer.config.n_init,
                n_ckpt=diarizer.config.n_ckpt,
                centroid_threshold=diarizer.config.centroid_link_threshold,
                emitted_count=len(diarizer.emitted),
                checkpoint_merges=diarizer.checkpoint.merge_count,
            )
            db.add(run)
            db.flush()

            for position, entry in enumerate(diarizer.checkpoint.entries):
                db.add(CheckpointRow(
                    run_id=run.id, position=position, weight=entry.weight,
                    mean=[float(x) for x in entry.mean],
                ))
            for label in sorted(diarizer.centroids.centroids):
                centroid = diarizer.centroids.centroids[label]
                db.add(CentroidRow(
                    run_id=run.id, label=label, usage=centroid.usage, weight=centroid.weight,
                    mean=[float(x) for x in centroid.mean],
                ))
            for retired in sorted(diarizer.centroids.alias_map):
                db.add(AliasRow(
                    run_id=run.id, retired_label=retired,
                    survivor_label=diarizer.centroids.resolve(retired),
                ))
            db.commit()
            logger.info(f"✅ Снимок состояния {uri} сохранён (run_id={run.id})")
            return run.id
        except Exception as e:
            db.rollback()
            logger.error(f"Ошибка сохранения состояния {uri}: {e}")
            raise
        finally:
            db.close()

    def get_run_info(self, run_id: int) -> Optional[Dict]:
        """Сводка по снимку: параметры, веса чекпоинтов, центроиды, псевдонимы"""
        db = self.SessionLocal()
        try:
            run = db.query(StateRun).filter(StateRun.id == run_id).first()
            if not run:
                return None
            checkpoints = db.query(CheckpointRow).filter(
                CheckpointRow.run_id == run_id
            ).order_by(CheckpointRow.position).all()
            centroids = db.query(CentroidRow).filter(
                CentroidRow.run_id == run_id
            ).order_by(CentroidRow.label).all()
            aliases = db.query(AliasRow).filter(AliasRow.run_id == run_id).all()
            return {
                "uri": run.uri,
                "phase": run.phase,
                "current_k": run.current_k,
                "n_seen": run.n_seen,
                "emitted_count": run.emitted_count,
                "checkpoint_weights": [row.weight for row in checkpoints],
                "checkpoint_merges": run.checkpoint_merges,
                "centroids": [
                    {"label": row.label, "usage": row.usage, "weight": row.weight}
                    for row in centroids
                ],
                "aliases": {row.retired_label: row.survivor_label for row in aliases},
            }
        finally:
            db.close()

    def list_runs(self) -> List[Dict]:
        """Все снимки по порядку создания"""
        db = self.SessionLocal()
        try:
            runs = db.query(StateRun).order_by(StateRun.id).all()
            return [
                {"id": run.id, "uri": run.uri, "phase": run.phase, "current_k": run.current_k}
                for run in runs
            ]
        finally:
            db.close()
