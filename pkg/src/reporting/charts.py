"""
Chart Generator
Loss curves and ablation bar charts written next to run outputs
"""
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]


class ChartGenerator:
    """
    Generate static charts for training runs

    Features:
    - Loss curve with moving average
    - Positive / negative similarity traces
    - Ablation bar chart with seed spread
    """

    def __init__(self, window: int = 10):
        """Initialize chart generator"""
        self.logger = logger
        self.window = window

        self.colors = {
            'loss': '#2563EB',
            'average': '#DC2626',
            'positive': '#10B981',
            'negative': '#F59E0B',
            'bar': '#6366F1',
            'grid': '#CBD5E1'
        }

    def create_loss_chart(
        self,
        metrics: pd.DataFrame,
        save_path: PathLike,
        title: Optional[str] = None
    ) -> Path:
        """
        Plot loss per step, its moving average and the similarity traces

        Args:
            metrics: DataFrame from the metrics log
            save_path: PNG destination
            title: Chart title

        Returns:
            Path written
        """
        save_path = Path(save_path)
        fig, (ax_loss, ax_sim) = plt.subplots(2, 1, figsize=(10, 7), sharex=True)

        if not metrics.empty:
            steps = metrics['step']
            ax_loss.plot(steps, metrics['loss'], color=self.colors['loss'], alpha=0.4, label='loss')
            ax_loss.plot(
                steps,
                metrics['loss'].rolling(self.window, min_periods=1).mean(),
                color=self.colors['average'],
                linewidth=2,
                label=f'{self.window}-step average'
            )
            ax_sim.plot(steps, metrics['mean_pos_sim'], color=self.colors['positive'], label='anchor · positive')
            ax_sim.plot(steps, metrics['mean_neg_sim'], color=self.colors['negative'], label='anchor · negative')

        ax_loss.set_ylabel('Loss', fontsize=12)
        ax_loss.set_title(title or 'Pretraining Loss', fontsize=14, fontweight='bold')
        ax_loss.legend(fontsize=10)
        ax_loss.grid(True, alpha=0.3)
        ax_sim.set_xlabel('Step', fontsize=12)
        ax_sim.set_ylabel('Cosine similarity', fontsize=12)
        ax_sim.legend(fontsize=10)
        ax_sim.grid(True, alpha=0.3)

        save_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(save_path, dpi=150, bbox_inches='tight')
        plt.close(fig)
        self.logger.info(f"Loss chart saved to {save_path}", category="evaluation")
        return save_path

    def create_ablation_chart(
        self,
        results: pd.DataFrame,
        save_path: PathLike,
        metric: str = 'top1',
        title: str = 'Ablation: probe top-1'
    ) -> Path:
        """
        Bar chart of the mean metric per variant, error bars over seeds

        Args:
            results: One row per (variant, seed)
            save_path: PNG destination
            metric: Column to plot
            title: Chart title

        Returns:
            Path written
        """
        save_path = Path(save_path)
        summary = results.groupby('variant', sort=False)[metric].agg(['mean', 'std']).fillna(0.0)

        fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(summary)), 5))
        ax.bar(summary.index, summary['mean'], yerr=summary['std'], color=self.colors['bar'], capsize=4)
        for i, value in enumerate(summary['mean']):
            ax.text(i, value, f'{value:.2f}', ha='center', va='bottom', fontsize=10)

        ax.set_ylabel(metric, fontsize=12)
        ax.set_ylim(0, 1.05)
        ax.set_title(title, fontsize=14, fontweight='bold')
        ax.grid(True, axis='y', alpha=0.3)
        plt.setp(ax.get_xticklabels(), rotation=30, ha='right')

        save_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(save_path, dpi=150, bbox_inches='tight')
        plt.close(fig)
        self.logger.info(f"Ablation chart saved to {save_path}", category="evaluation")
        return save_path
