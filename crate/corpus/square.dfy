method square(x: int) returns (r: int)
  ensures r == x * x
  ensures r >= 0
{
  r := x * x;
}
