"""Domain types: gaze samples, screen layout, region classification and the
paginated document model with carry-over page turning."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace


class Region(enum.Enum):
    TOP = "top"
    READING = "reading"
    BOTTOM = "bottom"
    OFF_SCREEN = "off_screen"


class SampleKind(enum.Enum):
    RAW = "raw"
    CALIBRATED = "calibrated"


class ScrollCause(enum.Enum):
    EYESWIPE = "eyeswipe"
    HITBOX = "hitbox"
    MOVING_BAR = "moving_bar"
    AUTO_SCROLL = "auto_scroll"
    TOUCH = "touch"


class GeometryError(ValueError):
    pass


class EndOfDocumentError(Exception):
    """Raised when turning past the last page."""


@dataclass(frozen=True, slots=True)
class GazeSample:
    """One timestamped estimated gaze point in screen pixels.

    Origin is the top-left corner, y grows downward. ``on_screen`` is the
    validity flag: an off-screen sample's coordinates are not meaningful.
    """

    t_ms: float
    x_px: float
    y_px: float
    on_screen: bool = True
    kind: SampleKind = SampleKind.RAW


@dataclass(frozen=True, slots=True)
class ScreenGeometry:
    """Screen layout in logical pixels plus the pixel/centimeter scale.

    The top bar holds instructions and activation signals, the bottom bar
    holds the gaze widgets, and the band in between is the reading area.
    """

    width_px: int = 428
    height_px: int = 926
    top_bar_px: int = 100
    bottom_bar_px: int = 150
    px_per_cm: float = 60.1

    def __post_init__(self) -> None:
        if self.width_px <= 0 or self.height_px <= 0:
            raise GeometryError("screen dimensions must be positive")
        if self.top_bar_px + self.bottom_bar_px >= self.height_px:
            raise GeometryError("bars leave no reading area")
        if self.px_per_cm <= 0:
            raise GeometryError("px_per_cm must be positive")

    @property
    def reading_height_px(self) -> int:
        return self.height_px - self.top_bar_px - self.bottom_bar_px

    @property
    def reading_top_px(self) -> int:
        return self.top_bar_px

    @property
    def reading_bottom_px(self) -> int:
        return self.height_px - self.bottom_bar_px

    def contains(self, x_px: float, y_px: float) -> bool:
        return 0 <= x_px < self.width_px and 0 <= y_px < self.height_px


def classify_region(g: ScreenGeometry, x_px: float, y_px: float,
                    on_screen: bool = True) -> Region:
    """Assign a point to exactly one screen region (total function)."""
    if not on_screen or not g.contains(x_px, y_px):
        return Region.OFF_SCREEN
    if y_px < g.top_bar_px:
        return Region.TOP
    if y_px >= g.height_px - g.bottom_bar_px:
        return Region.BOTTOM
    return Region.READING


def classify_sample(g: ScreenGeometry, s: GazeSample) -> Region:
    return classify_region(g, s.x_px, s.y_px, s.on_screen)


def cm_to_px(g: ScreenGeometry, d_cm: float) -> float:
    if d_cm < 0:
        raise ValueError(f"negative distance: {d_cm}")
    return d_cm * g.px_per_cm


def px_to_cm(g: ScreenGeometry, d_px: float) -> float:
    return d_px / g.px_per_cm


@dataclass(frozen=True, slots=True)
class CarriedLine:
    """The last line of the previous page, shown at the top of the new page
    with an indication-arrow marker."""

    source_page: int
    source_line: int
    arrow: bool = True


@dataclass(frozen=True, slots=True)
class Page:
    index: int
    line_y_positions: tuple[float, ...]
    carried_line: CarriedLine | None = None

    def __post_init__(self) -> None:
        ys = self.line_y_positions
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("line_y_positions must be strictly ascending")


@dataclass(frozen=True, slots=True)
class DocumentModel:
    pages: tuple[Page, ...]
    lines_per_page: int
    line_height_px: float

    def __post_init__(self) -> None:
        for i, p in enumerate(self.pages):
            if p.index != i:
                raise ValueError("page indices must be contiguous from 0")
            if len(p.line_y_positions) > self.lines_per_page:
                raise ValueError(f"page {i} exceeds lines_per_page")

    @property
    def page_count(self) -> int:
        return len(self.pages)


def build_document(g: ScreenGeometry, n_pages: int = 6,
                   lines_per_page: int = 16) -> DocumentModel:
    """Layout-only document: lines evenly spaced through the reading area,
    the last baseline sitting on its lower edge."""
    if n_pages < 1 or lines_per_page < 1:
        raise ValueError("document needs at least one page and one line")
    line_h = g.reading_height_px / lines_per_page
    ys = tuple(line_h * (i + 1) for i in range(lines_per_page))
    pages = tuple(Page(index=i, line_y_positions=ys) for i in range(n_pages))
    return DocumentModel(pages=pages, lines_per_page=lines_per_page,
                         line_height_px=line_h)


def turn_page(doc: DocumentModel, current: Page) -> Page:
    """Advance one page, carrying the last line of ``current`` to the top of
    the next page (the 95% turn: the carried line is the unchanged 5%)."""
    nxt = current.index + 1
    if nxt >= doc.page_count:
        raise EndOfDocumentError(f"page {current.index} is the last page")
    carried = CarriedLine(source_page=current.index,
                          source_line=len(current.line_y_positions) - 1)
    return replace(doc.pages[nxt], carried_line=carried)


def last_line_screen_y(g: ScreenGeometry, page: Page) -> float:
    """Screen-coordinate y of the page's last baseline."""
    return g.top_bar_px + page.line_y_positions[-1]


@dataclass(frozen=True, slots=True)
class ScrollEvent:
    t_ms: float
    from_page: int
    to_page: int
    cause: ScrollCause

    def __post_init__(self) -> None:
        if self.to_page != self.from_page + 1:
            raise ValueError("forward scroll must advance exactly one page")
