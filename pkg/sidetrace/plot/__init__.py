from sidetrace.plot.svgplot import SvgPlot
